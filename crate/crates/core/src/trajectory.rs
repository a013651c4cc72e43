//! Leader/follower trajectory data: ingestion, kinematics, cleaning,
//! summaries and the train/test split.
//!
//! Raw CSV rows are read into [`RawTrajectory`] values whose optional
//! columns may be missing. [`derive_kinematics`] fills those in (central
//! differences for accelerations, spacing from positions, `dv = v_f - v_l`),
//! drops physically implausible rows and splits the result into contiguous
//! [`Trajectory`] segments.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::stats;
use crate::{Error, Result};

/// Largest plausible acceleration magnitude kept by cleaning, m/s².
pub const MAX_ABS_ACCEL: f64 = 10.0;

/// Frequency assumed for single-row trajectories where it cannot be inferred.
pub const DEFAULT_HZ: f64 = 10.0;

/// One cleaned kinematic sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Seconds since trajectory start (as recorded).
    pub t: f64,
    pub v_l: f64,
    pub v_f: f64,
    pub a_l: f64,
    pub a_f: f64,
    /// Bumper-to-bumper spacing, m.
    pub gap: f64,
    /// Follower minus leader speed, m/s.
    pub dv: f64,
}

/// A cleaned fixed-frequency trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    pub hz: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sampling step in seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.hz
    }

    /// Projects one field of every sample into a series.
    pub fn series(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn follower_accel(&self) -> Vec<f64> {
        self.series(|s| s.a_f)
    }
}

/// A row as ingested; optional columns are filled by [`derive_kinematics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSample {
    /// Line number in the source file (1-based, header is line 1).
    pub row: usize,
    pub t: f64,
    pub v_l: f64,
    pub v_f: f64,
    pub a_l: Option<f64>,
    pub a_f: Option<f64>,
    pub gap: Option<f64>,
    pub dv: Option<f64>,
    pub x_l: Option<f64>,
    pub x_f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTrajectory {
    pub id: String,
    pub hz: f64,
    pub samples: Vec<RawSample>,
}

impl From<&Trajectory> for RawTrajectory {
    fn from(traj: &Trajectory) -> Self {
        RawTrajectory {
            id: traj.id.clone(),
            hz: traj.hz,
            samples: traj
                .samples
                .iter()
                .enumerate()
                .map(|(i, s)| RawSample {
                    row: i + 2,
                    t: s.t,
                    v_l: s.v_l,
                    v_f: s.v_f,
                    a_l: Some(s.a_l),
                    a_f: Some(s.a_f),
                    gap: Some(s.gap),
                    dv: Some(s.dv),
                    x_l: None,
                    x_f: None,
                })
                .collect(),
        }
    }
}

/// Canonical dataset fields addressable by a [`Schema`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    TrajId,
    TimeS,
    VLeader,
    VFollower,
    ALeader,
    AFollower,
    GapM,
    XLeader,
    XFollower,
    Dv,
}

impl Field {
    pub const ALL: [Field; 10] = [
        Field::TrajId,
        Field::TimeS,
        Field::VLeader,
        Field::VFollower,
        Field::ALeader,
        Field::AFollower,
        Field::GapM,
        Field::XLeader,
        Field::XFollower,
        Field::Dv,
    ];

    /// Canonical column name.
    pub fn canonical(self) -> &'static str {
        match self {
            Field::TrajId => "traj_id",
            Field::TimeS => "time_s",
            Field::VLeader => "v_leader",
            Field::VFollower => "v_follower",
            Field::ALeader => "a_leader",
            Field::AFollower => "a_follower",
            Field::GapM => "gap_m",
            Field::XLeader => "x_leader",
            Field::XFollower => "x_follower",
            Field::Dv => "dv",
        }
    }

    pub fn from_canonical(name: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.canonical() == name)
    }
}

/// Maps canonical fields to the column names used by a particular file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: BTreeMap<Field, String>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            columns: Field::ALL
                .into_iter()
                .map(|f| (f, f.canonical().to_string()))
                .collect(),
        }
    }
}

impl Schema {
    /// Builds a schema from overrides on top of the canonical names.
    pub fn with_overrides<'a, I>(overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut schema = Schema::default();
        for (field, column) in overrides {
            let f = Field::from_canonical(field)
                .ok_or_else(|| Error::Schema(format!("unknown canonical field `{field}`")))?;
            schema.columns.insert(f, column.to_string());
        }
        Ok(schema)
    }

    /// Parses `field=column` pairs separated by commas.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Schema(format!("expected field=column, got `{item}`")))?;
            pairs.push((k.trim(), v.trim()));
        }
        Schema::with_overrides(pairs)
    }

    pub fn column(&self, field: Field) -> &str {
        &self.columns[&field]
    }
}

/// Vehicle lengths used when spacing is derived from positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleLengths {
    pub leader: f64,
    pub follower: f64,
}

impl Default for VehicleLengths {
    fn default() -> Self {
        VehicleLengths { leader: 4.5, follower: 4.5 }
    }
}

/// Orders trajectory ids naturally: `/`-separated components compare
/// numerically when both parse as integers, lexicographically otherwise.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let mut ia = a.split('/');
    let mut ib = b.split('/');
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => {
                let ord = match (x.parse::<u64>(), y.parse::<u64>()) {
                    (Ok(p), Ok(q)) => p.cmp(&q),
                    _ => x.cmp(y),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
    }
}

fn infer_hz(times: &[f64]) -> f64 {
    if times.len() < 2 {
        return DEFAULT_HZ;
    }
    let mut steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(f64::total_cmp);
    let dt = steps[steps.len() / 2];
    ((1.0 / dt) * 1e6).round() / 1e6
}

/// Reads a trajectory CSV. Rows are grouped by trajectory id (a missing id
/// column puts everything in trajectory `0`); groups are returned in natural
/// id order. Lines starting with `#` are treated as comments.
pub fn ingest_csv<R: Read>(source: R, schema: &Schema) -> Result<Vec<RawTrajectory>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let index: HashMap<Field, usize> = Field::ALL
        .into_iter()
        .filter_map(|f| {
            headers
                .iter()
                .position(|h| h == schema.column(f))
                .map(|i| (f, i))
        })
        .collect();

    for f in [Field::TimeS, Field::VLeader, Field::VFollower] {
        if !index.contains_key(&f) {
            return Err(Error::Schema(format!(
                "missing mandatory column `{}` (field {})",
                schema.column(f),
                f.canonical()
            )));
        }
    }
    let has_positions = index.contains_key(&Field::XLeader) && index.contains_key(&Field::XFollower);
    if !index.contains_key(&Field::GapM) && !has_positions {
        return Err(Error::Schema(format!(
            "need either `{}` or both `{}` and `{}`",
            schema.column(Field::GapM),
            schema.column(Field::XLeader),
            schema.column(Field::XFollower)
        )));
    }

    let mut groups: BTreeMap<String, Vec<RawSample>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let num = |f: Field| -> Result<Option<f64>> {
            let Some(&i) = index.get(&f) else {
                return Ok(None);
            };
            let raw = record.get(i).unwrap_or("");
            if raw.is_empty() || raw.eq_ignore_ascii_case("nan") {
                return Ok(None);
            }
            raw.parse::<f64>().map(Some).map_err(|_| Error::Data {
                row,
                message: format!("column `{}`: cannot parse `{raw}` as a number", schema.column(f)),
            })
        };
        let required = |f: Field| -> Result<f64> {
            num(f)?.ok_or_else(|| Error::Data {
                row,
                message: format!("missing value in mandatory column `{}`", schema.column(f)),
            })
        };
        let id = match index.get(&Field::TrajId) {
            Some(&i) => record.get(i).unwrap_or("").to_string(),
            None => "0".to_string(),
        };
        let sample = RawSample {
            row,
            t: required(Field::TimeS)?,
            v_l: required(Field::VLeader)?,
            v_f: required(Field::VFollower)?,
            a_l: num(Field::ALeader)?,
            a_f: num(Field::AFollower)?,
            gap: num(Field::GapM)?,
            dv: num(Field::Dv)?,
            x_l: num(Field::XLeader)?,
            x_f: num(Field::XFollower)?,
        };
        let group = groups.entry(id.clone()).or_insert_with(|| {
            order.push(id);
            Vec::new()
        });
        if let Some(prev) = group.last() {
            if !(sample.t > prev.t) {
                return Err(Error::Data {
                    row,
                    message: format!(
                        "timestamp {} does not increase (previous {} at row {})",
                        sample.t, prev.t, prev.row
                    ),
                });
            }
        }
        group.push(sample);
    }

    order.sort_by(|a, b| natural_cmp(a, b));
    Ok(order
        .into_iter()
        .map(|id| {
            let samples = groups.remove(&id).unwrap_or_default();
            let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
            RawTrajectory { hz: infer_hz(&times), id, samples }
        })
        .collect())
}

/// Finite-difference derivative: central in the interior, one-sided at the
/// ends, with step `dt`.
pub fn finite_difference(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    (values[1] - values[0]) / dt
                } else if i == n - 1 {
                    (values[n - 1] - values[n - 2]) / dt
                } else {
                    (values[i + 1] - values[i - 1]) / (2.0 * dt)
                }
            })
            .collect(),
    }
}

fn is_valid(s: &Sample) -> bool {
    let finite = [s.t, s.v_l, s.v_f, s.a_l, s.a_f, s.gap, s.dv]
        .iter()
        .all(|x| x.is_finite());
    finite
        && s.gap > 0.0
        && s.v_l >= 0.0
        && s.v_f >= 0.0
        && s.a_l.abs() <= MAX_ABS_ACCEL
        && s.a_f.abs() <= MAX_ABS_ACCEL
}

/// Fills missing kinematics, drops implausible rows and splits the result
/// into contiguous segments.
///
/// A single surviving segment keeps the trajectory id; multiple segments are
/// named `{id}/1`, `{id}/2`, ... in time order.
pub fn derive_kinematics(raw: &RawTrajectory, lengths: VehicleLengths) -> Result<Vec<Trajectory>> {
    let dt = 1.0 / raw.hz;
    let max_step = 1.5 * dt;

    // Runs of rows without timing gaps; derivatives never span a gap.
    let mut runs: Vec<&[RawSample]> = Vec::new();
    let mut start = 0;
    for i in 1..=raw.samples.len() {
        if i == raw.samples.len() || raw.samples[i].t - raw.samples[i - 1].t > max_step {
            if i > start {
                runs.push(&raw.samples[start..i]);
            }
            start = i;
        }
    }

    let mut segments: Vec<Vec<Sample>> = Vec::new();
    for run in runs {
        let v_l: Vec<f64> = run.iter().map(|s| s.v_l).collect();
        let v_f: Vec<f64> = run.iter().map(|s| s.v_f).collect();
        let need_al = run.iter().any(|s| s.a_l.is_none());
        let need_af = run.iter().any(|s| s.a_f.is_none());
        let d_l = if need_al { finite_difference(&v_l, dt) } else { Vec::new() };
        let d_f = if need_af { finite_difference(&v_f, dt) } else { Vec::new() };

        let mut current: Vec<Sample> = Vec::new();
        for (i, r) in run.iter().enumerate() {
            let gap = match (r.gap, r.x_l, r.x_f) {
                (Some(g), _, _) => g,
                (None, Some(xl), Some(xf)) => xl - xf - lengths.leader,
                _ => f64::NAN,
            };
            let sample = Sample {
                t: r.t,
                v_l: r.v_l,
                v_f: r.v_f,
                a_l: r.a_l.unwrap_or_else(|| d_l[i]),
                a_f: r.a_f.unwrap_or_else(|| d_f[i]),
                gap,
                dv: r.dv.unwrap_or(r.v_f - r.v_l),
            };
            if is_valid(&sample) {
                current.push(sample);
            } else if !current.is_empty() {
                segments.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            segments.push(current);
        }
    }

    if segments.is_empty() {
        return Err(Error::EmptyTrajectory(raw.id.clone()));
    }
    let single = segments.len() == 1;
    Ok(segments
        .into_iter()
        .enumerate()
        .map(|(k, samples)| Trajectory {
            id: if single { raw.id.clone() } else { format!("{}/{}", raw.id, k + 1) },
            hz: raw.hz,
            samples,
        })
        .collect())
}

/// Derives every raw trajectory; trajectories that clean down to nothing are
/// skipped with a warning. Errors only when the whole dataset is empty.
pub fn clean_dataset(raws: &[RawTrajectory], lengths: VehicleLengths) -> Result<Vec<Trajectory>> {
    let mut out = Vec::new();
    for raw in raws {
        match derive_kinematics(raw, lengths) {
            Ok(mut segs) => out.append(&mut segs),
            Err(Error::EmptyTrajectory(id)) => log::warn!("trajectory {id} dropped entirely by cleaning"),
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyTrajectory("<dataset>".into()));
    }
    Ok(out)
}

/// Moments and range of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl VariableStats {
    fn of(xs: &[f64]) -> Self {
        VariableStats {
            mean: stats::mean(xs),
            std: stats::population_std(xs),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Per-variable statistics over a whole dataset (population std).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub v_l: VariableStats,
    pub a_l: VariableStats,
    pub v_f: VariableStats,
    pub a_f: VariableStats,
    pub gap: VariableStats,
    pub records: usize,
    pub trajectories: usize,
}

impl DatasetSummary {
    pub fn rows(&self) -> [(&'static str, &'static str, VariableStats); 5] {
        [
            ("v_l", "m/s", self.v_l),
            ("a_l", "m/s2", self.a_l),
            ("v_f", "m/s", self.v_f),
            ("a_f", "m/s2", self.a_f),
            ("gap", "m", self.gap),
        ]
    }
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8}{:>10}{:>10}{:>10}{:>10}  unit", "variable", "mean", "std", "min", "max")?;
        for (name, unit, s) in self.rows() {
            writeln!(
                f,
                "{:<8}{:>10.3}{:>10.3}{:>10.3}{:>10.3}  {unit}",
                name, s.mean, s.std, s.min, s.max
            )?;
        }
        write!(f, "records {}  trajectories {}", self.records, self.trajectories)
    }
}

pub fn summarize(dataset: &[Trajectory]) -> Result<DatasetSummary> {
    let all: Vec<&Sample> = dataset.iter().flat_map(|t| t.samples.iter()).collect();
    if all.is_empty() {
        return Err(Error::Domain("cannot summarize an empty dataset".into()));
    }
    let col = |f: fn(&Sample) -> f64| all.iter().map(|s| f(s)).collect::<Vec<_>>();
    Ok(DatasetSummary {
        v_l: VariableStats::of(&col(|s| s.v_l)),
        a_l: VariableStats::of(&col(|s| s.a_l)),
        v_f: VariableStats::of(&col(|s| s.v_f)),
        a_f: VariableStats::of(&col(|s| s.a_f)),
        gap: VariableStats::of(&col(|s| s.gap)),
        records: all.len(),
        trajectories: dataset.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.8 }
    }
}

/// Splits whole trajectories in id order: the first `ceil(n * fraction)` go
/// to training, the rest to testing.
pub fn split(dataset: &[Trajectory], spec: SplitSpec) -> Result<(Vec<Trajectory>, Vec<Trajectory>)> {
    let f = spec.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Split(format!("train fraction {f} outside (0, 1)")));
    }
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Split(format!("need at least 2 trajectories, got {n}")));
    }
    // Tolerance keeps products like 5 * 0.6 from rounding up past an integer.
    let n_train = ((n as f64) * f - 1e-9).ceil() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Split(format!(
            "fraction {f} of {n} trajectories leaves an empty partition"
        )));
    }
    let mut ordered: Vec<Trajectory> = dataset.to_vec();
    ordered.sort_by(|a, b| natural_cmp(&a.id, &b.id));
    let test = ordered.split_off(n_train);
    Ok((ordered, test))
}

/// Writes trajectories in the canonical CSV layout, optionally preceded by
/// `#` comment lines.
pub fn write_csv<W: Write>(dataset: &[Trajectory], mut out: W, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        Field::TrajId.canonical(),
        Field::TimeS.canonical(),
        Field::VLeader.canonical(),
        Field::VFollower.canonical(),
        Field::ALeader.canonical(),
        Field::AFollower.canonical(),
        Field::GapM.canonical(),
    ])?;
    for traj in dataset {
        for s in &traj.samples {
            w.write_record([
                traj.id.clone(),
                s.t.to_string(),
                s.v_l.to_string(),
                s.v_f.to_string(),
                s.a_l.to_string(),
                s.a_f.to_string(),
                s.gap.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
