//! Multi-window backtesting.
//!
//! Each trajectory is cut into successive context/horizon windows; the
//! horizon advances by `stride` and, in expanding mode, the context always
//! starts at sample 0 so revealed truth is folded in. Every window is scored
//! by the RMSE of the point forecast, and a report summarizes the per-window
//! RMSEs by their mean and population standard deviation.

use std::fmt;
use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::forecast::{Forecast, ForecastRequest, Forecaster};
use crate::idm::{self, IdmParams, SignConvention};
use crate::stats;
use crate::trajectory::{natural_cmp, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub context_len: usize,
    pub horizon_len: usize,
    pub stride: usize,
    pub expanding: bool,
    pub n_samples: usize,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig { context_len: 60, horizon_len: 30, stride: 30, expanding: true, n_samples: 20 }
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.context_len == 0 || self.horizon_len == 0 || self.stride == 0 || self.n_samples == 0 {
            return Err(Error::Config(format!(
                "context ({}), horizon ({}), stride ({}) and n_samples ({}) must all be at least 1",
                self.context_len, self.horizon_len, self.stride, self.n_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub traj_id: String,
    /// Position of the window within its trajectory.
    pub index: usize,
    pub context: Range<usize>,
    pub horizon: Range<usize>,
}

impl Window {
    /// Seed for this window's sampling, stable across processing order.
    pub fn seed(&self, seed: u64) -> u64 {
        stats::mix_seed(seed, &[stats::fnv1a(&self.traj_id), self.index as u64])
    }
}

pub fn make_windows(traj: &Trajectory, cfg: &BacktestConfig) -> Vec<Window> {
    let (c, h) = (cfg.context_len, cfg.horizon_len);
    if traj.len() < c + h {
        log::warn!("trajectory {} has {} samples, fewer than context + horizon = {}", traj.id, traj.len(), c + h);
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut start = c;
    while start + h <= traj.len() {
        let context = if cfg.expanding { 0..start } else { start - c..start };
        out.push(Window { traj_id: traj.id.clone(), index: out.len(), context, horizon: start..start + h });
        start += cfg.stride.max(1);
    }
    out
}

/// Window count `len(test) / H` for a contiguous test span.
pub fn nominal_window_count(test_len: usize, horizon: usize) -> usize {
    test_len.checked_div(horizon).unwrap_or(0)
}

pub fn window_rmse(truth: &[f64], point: &[f64]) -> Result<f64> {
    if truth.len() != point.len() {
        return Err(Error::Contract(format!("truth has {} steps, forecast has {}", truth.len(), point.len())));
    }
    Ok(stats::rmse(truth, point))
}

/// Anything that can forecast the follower acceleration over a window.
pub trait BacktestModel: Send + Sync {
    fn name(&self) -> &str;

    fn forecast_window(&self, traj: &Trajectory, window: &Window, n_samples: usize, seed: u64) -> Result<Forecast>;
}

impl<M: BacktestModel + ?Sized> BacktestModel for Box<M> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn forecast_window(&self, traj: &Trajectory, window: &Window, n_samples: usize, seed: u64) -> Result<Forecast> {
        (**self).forecast_window(traj, window, n_samples, seed)
    }
}

/// Runs a univariate forecaster on the follower acceleration context.
#[derive(Debug, Clone)]
pub struct Univariate<F>(pub F);

impl<F: Forecaster> BacktestModel for Univariate<F> {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn forecast_window(&self, traj: &Trajectory, window: &Window, n_samples: usize, seed: u64) -> Result<Forecast> {
        let context = traj.samples[window.context.clone()].iter().map(|s| s.a_f).collect();
        let req = ForecastRequest::new(context, window.horizon.len(), n_samples).with_seed(seed);
        self.0.forecast(&req)
    }
}

/// The car-following law evaluated on the observed state at each horizon
/// step.
#[derive(Debug, Clone)]
pub struct IdmModel {
    pub params: IdmParams,
    pub convention: SignConvention,
}

impl BacktestModel for IdmModel {
    fn name(&self) -> &str {
        "idm"
    }

    fn forecast_window(&self, traj: &Trajectory, window: &Window, n_samples: usize, _seed: u64) -> Result<Forecast> {
        let point = traj.samples[window.horizon.clone()]
            .iter()
            .map(|s| idm::acceleration(&self.params, s.v_f, s.v_l, s.gap, self.convention))
            .collect::<Result<Vec<_>>>()?;
        Ok(Forecast::deterministic(point, n_samples))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub traj_id: String,
    pub window_id: usize,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub model: String,
    pub config: BacktestConfig,
    pub seed: u64,
    /// Identifies the data and settings the report was produced from.
    #[serde(default)]
    pub provenance: String,
    pub windows: Vec<WindowScore>,
    pub mean_rmse: f64,
    pub std_rmse: f64,
    pub n_windows: usize,
    /// Mean absolute error over every scored step.
    pub mae_like: f64,
}

impl BacktestReport {
    /// Sorts windows by trajectory id (natural order) and window index, then
    /// computes the summary statistics.
    pub fn from_scores(model: &str, config: BacktestConfig, seed: u64, mut windows: Vec<WindowScore>, mae_like: f64) -> Self {
        windows.sort_by(|a, b| natural_cmp(&a.traj_id, &b.traj_id).then(a.window_id.cmp(&b.window_id)));
        let rmses: Vec<f64> = windows.iter().map(|w| w.rmse).collect();
        BacktestReport {
            model: model.to_string(),
            config,
            seed,
            provenance: String::new(),
            mean_rmse: stats::mean(&rmses),
            std_rmse: stats::population_std(&rmses),
            n_windows: windows.len(),
            windows,
            mae_like,
        }
    }

    /// `model,window_id,traj_id,rmse`, preceded by `#` comment lines.
    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["model", "window_id", "traj_id", "rmse"])?;
        for s in &self.windows {
            w.write_record([self.model.as_str(), &s.window_id.to_string(), &s.traj_id, &s.rmse.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scores `model` on every window of every test trajectory.
pub fn evaluate(model: &dyn BacktestModel, test: &[Trajectory], cfg: &BacktestConfig, seed: u64) -> Result<BacktestReport> {
    cfg.validate()?;
    if test.is_empty() {
        return Err(Error::Evaluation("empty test set".into()));
    }
    let jobs: Vec<(&Trajectory, Window)> =
        test.iter().flat_map(|t| make_windows(t, cfg).into_iter().map(move |w| (t, w))).collect();
    if jobs.is_empty() {
        return Err(Error::Evaluation(format!(
            "no trajectory is long enough for context {} + horizon {}",
            cfg.context_len, cfg.horizon_len
        )));
    }

    let scored: Vec<(WindowScore, f64, usize)> = jobs
        .par_iter()
        .map(|(traj, w)| {
            let f = model.forecast_window(traj, w, cfg.n_samples, w.seed(seed))?;
            let truth: Vec<f64> = traj.samples[w.horizon.clone()].iter().map(|s| s.a_f).collect();
            if f.point.iter().any(|x| !x.is_finite()) {
                return Err(Error::Contract(format!("{} produced a non-finite forecast", model.name())));
            }
            let rmse = window_rmse(&truth, &f.point)?;
            let abs: f64 = truth.iter().zip(&f.point).map(|(t, p)| (t - p).abs()).sum();
            Ok((WindowScore { traj_id: w.traj_id.clone(), window_id: w.index, rmse }, abs, truth.len()))
        })
        .collect::<Result<_>>()?;

    let abs_total: f64 = scored.iter().map(|s| s.1).sum();
    let steps: usize = scored.iter().map(|s| s.2).sum();
    let windows = scored.into_iter().map(|s| s.0).collect();
    Ok(BacktestReport::from_scores(model.name(), *cfg, seed, windows, abs_total / steps as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub model: String,
    pub mean_rmse: f64,
    pub std_rmse: f64,
    pub n_windows: usize,
    /// Percent reduction in mean RMSE relative to the reference model.
    pub improvement_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub reference: Option<String>,
    pub rows: Vec<RankRow>,
}

/// `(reference - mean) / reference · 100`.
pub fn improvement_pct(reference: f64, mean: f64) -> f64 {
    (reference - mean) / reference * 100.0
}

/// Ranks reports by ascending mean RMSE (ties by model name).
pub fn compare(reports: &[BacktestReport], reference: Option<&str>) -> Result<Ranking> {
    let first = reports.first().ok_or_else(|| Error::Contract("nothing to compare".into()))?;
    for r in &reports[1..] {
        if r.config != first.config || r.seed != first.seed || r.provenance != first.provenance {
            return Err(Error::Contract(format!(
                "reports for {} and {} come from different backtest configurations",
                first.model, r.model
            )));
        }
    }
    let ref_mean = match reference {
        Some(name) if reports.len() > 1 => {
            let r = reports
                .iter()
                .find(|r| r.model == name)
                .ok_or_else(|| Error::Contract(format!("reference model `{name}` not among the reports")))?;
            Some((name.to_string(), r.mean_rmse))
        }
        _ => None,
    };
    let mut rows: Vec<RankRow> = reports
        .iter()
        .map(|r| RankRow {
            model: r.model.clone(),
            mean_rmse: r.mean_rmse,
            std_rmse: r.std_rmse,
            n_windows: r.n_windows,
            improvement_pct: ref_mean.as_ref().map(|(_, m)| improvement_pct(*m, r.mean_rmse)),
        })
        .collect();
    rows.sort_by(|a, b| a.mean_rmse.total_cmp(&b.mean_rmse).then_with(|| a.model.cmp(&b.model)));
    Ok(Ranking { reference: ref_mean.map(|(n, _)| n), rows })
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5);
        write!(f, "{:>4}  {:<width$}  {:>10}  {:>10}  {:>7}", "rank", "model", "mean_rmse", "std_rmse", "windows")?;
        if let Some(r) = &self.reference {
            write!(f, "  improvement_vs_{r}")?;
        }
        writeln!(f)?;
        for (i, row) in self.rows.iter().enumerate() {
            write!(
                f,
                "{:>4}  {:<width$}  {:>10.4}  {:>10.4}  {:>7}",
                i + 1,
                row.model,
                row.mean_rmse,
                row.std_rmse,
                row.n_windows
            )?;
            if let Some(p) = row.improvement_pct {
                write!(f, "  {p:.2}%")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFlag {
    Context,
    Truth,
    Forecast,
}

impl TraceFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceFlag::Context => "context",
            TraceFlag::Truth => "truth",
            TraceFlag::Forecast => "forecast",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub flag: TraceFlag,
    pub value: f64,
}

/// Context, truth and point forecast for one window, keyed by sample time.
pub fn trace_window(
    model: &dyn BacktestModel,
    traj: &Trajectory,
    window: &Window,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<TraceRow>> {
    let f = model.forecast_window(traj, window, n_samples, window.seed(seed))?;
    if f.point.len() != window.horizon.len() {
        return Err(Error::Contract("forecast length does not match the window horizon".into()));
    }
    let s = &traj.samples;
    let mut rows: Vec<TraceRow> =
        window.context.clone().map(|i| TraceRow { t: s[i].t, flag: TraceFlag::Context, value: s[i].a_f }).collect();
    rows.extend(window.horizon.clone().map(|i| TraceRow { t: s[i].t, flag: TraceFlag::Truth, value: s[i].a_f }));
    rows.extend(window.horizon.clone().zip(&f.point).map(|(i, &v)| TraceRow { t: s[i].t, flag: TraceFlag::Forecast, value: v }));
    Ok(rows)
}

pub fn write_trace<W: Write>(rows: &[TraceRow], mut out: W, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "flag", "value"])?;
    for r in rows {
        w.write_record([r.t.to_string().as_str(), r.flag.as_str(), &r.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
