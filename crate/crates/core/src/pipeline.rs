//! Command implementations behind the `cfbench` binary.
//!
//! Every command writes its artifacts through [`Artifacts`], which records
//! each file so a failed command can remove what it already wrote.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backtest::{self, evaluate, make_windows, BacktestModel, BacktestReport, IdmModel, Ranking, Univariate};
use crate::config::RunConfig;
use crate::ensemble::CovariateEnsemble;
use crate::forecast::{ArForecaster, Forecaster, HoltForecaster, Persistence};
use crate::idm::{self, Calibration, CalibrationConfig, IdmBounds, IdmParams, C2_RANGE};
use crate::interop::RemoteForecaster;
use crate::token::TokenForecaster;
use crate::trajectory::{self, natural_cmp, DatasetSummary, Trajectory};
use crate::{Error, Result};

/// Files written by the current command.
#[derive(Debug, Default)]
pub struct Artifacts {
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new() -> Self {
        Artifacts::default()
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }

    /// Renders the file in memory and writes it in one go.
    pub fn write(&mut self, path: &Path, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        self.written.push(path.to_path_buf());
        fs::write(path, buf)?;
        Ok(())
    }

    /// Removes every file written so far.
    pub fn rollback(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(&p);
        }
    }
}

/// Reads and cleans every configured dataset file. With several files the
/// trajectory ids are prefixed by the file stem.
pub fn load_dataset(cfg: &RunConfig) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    let schema = cfg.schema()?;
    let multi = cfg.data.paths.len() > 1;
    let mut all = Vec::new();
    for path in &cfg.data.paths {
        let file = fs::File::open(path)?;
        let mut raws = trajectory::ingest_csv(std::io::BufReader::new(file), &schema)?;
        if multi {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            for r in &mut raws {
                r.id = format!("{stem}/{}", r.id);
            }
        }
        all.extend(trajectory::clean_dataset(&raws, cfg.lengths())?);
    }
    all.sort_by(|a, b| natural_cmp(&a.id, &b.id));
    Ok(all)
}

fn comments(cfg: &RunConfig, extra: &str) -> Vec<String> {
    vec![cfg.header(), extra.to_string()]
}

pub fn run_ingest(cfg: &RunConfig, out: &Path, art: &mut Artifacts) -> Result<usize> {
    let data = load_dataset(cfg)?;
    art.write(out, |buf| trajectory::write_csv(&data, buf, &comments(cfg, "command=ingest")))?;
    Ok(data.len())
}

pub fn run_stats(cfg: &RunConfig) -> Result<DatasetSummary> {
    trajectory::summarize(&load_dataset(cfg)?)
}

pub fn calibration_config(cfg: &RunConfig) -> Result<CalibrationConfig> {
    Ok(CalibrationConfig {
        bounds: IdmBounds { c2: cfg.idm.calibrate_c2.then_some(C2_RANGE), ..IdmBounds::default() },
        convention: cfg.convention()?,
        budget: cfg.idm.budget,
        starts: cfg.idm.starts,
        seed: cfg.seed,
        base: IdmParams::default(),
    })
}

pub fn run_calibrate(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Calibration, PathBuf)> {
    let data = load_dataset(cfg)?;
    let (train, _) = trajectory::split(&data, cfg.split_spec())?;
    let cal = idm::calibrate(&train, &calibration_config(cfg)?)?;
    let path = cfg.output_dir.join("idm_params.txt");
    let text = cal.params.to_param_file(cfg.convention()?, Some(cal.rmse), &comments(cfg, "command=calibrate"));
    art.write(&path, |buf| {
        buf.extend_from_slice(text.as_bytes());
        Ok(())
    })?;
    Ok((cal, path))
}

fn univariate(cfg: &RunConfig, name: &str, train: &[Trajectory]) -> Result<Option<Arc<dyn Forecaster>>> {
    let bt = cfg.backtest_config();
    let f: Arc<dyn Forecaster> = match name {
        "persistence" => Arc::new(Persistence),
        "holt" => Arc::new(HoltForecaster::default()),
        "ar" => Arc::new(ArForecaster::new(cfg.models.ar_order)?),
        "token" => {
            let series: Vec<Vec<f64>> = train.iter().map(|t| t.follower_accel()).collect();
            Arc::new(TokenForecaster::train(&series, bt.context_len, bt.horizon_len, &cfg.token_config())?)
        }
        other => match cfg.adapters.iter().find(|a| a.label == other) {
            Some(a) => Arc::new(RemoteForecaster::new(a.endpoint()?)?),
            None => return Ok(None),
        },
    };
    Ok(Some(f))
}

fn idm_model(cfg: &RunConfig, train: &[Trajectory]) -> Result<IdmModel> {
    if let Some(path) = &cfg.idm.params_file {
        let (params, convention, _) = IdmParams::from_param_file(&fs::read_to_string(path)?)?;
        return Ok(IdmModel { params, convention });
    }
    let cal = idm::calibrate(train, &calibration_config(cfg)?)?;
    log::info!("calibrated IDM: train rmse {:.4}", cal.rmse);
    Ok(IdmModel { params: cal.params, convention: cfg.convention()? })
}

/// Instantiates the roster (plus covariate variants when enabled), fitting
/// anything that needs training on `train`.
pub fn build_models(cfg: &RunConfig, train: &[Trajectory]) -> Result<Vec<Box<dyn BacktestModel>>> {
    let mut models: Vec<Box<dyn BacktestModel>> = Vec::new();
    for name in &cfg.models.roster {
        if name == "idm" {
            models.push(Box::new(idm_model(cfg, train)?));
            continue;
        }
        if let Some(base) = name.strip_suffix("+cov") {
            let f = univariate(cfg, base, train)?.ok_or_else(|| Error::Config(format!("unknown model `{base}`")))?;
            models.push(Box::new(ensemble(cfg, f, train)?));
            continue;
        }
        let f = univariate(cfg, name, train)?.ok_or_else(|| Error::Config(format!("unknown model `{name}`")))?;
        if cfg.models.covariates {
            models.push(Box::new(ensemble(cfg, f.clone(), train)?));
        }
        models.push(Box::new(Univariate(f)));
    }
    let mut names: Vec<&str> = models.iter().map(|m| m.name()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("model `{}` appears twice in the roster", w[0])));
    }
    Ok(models)
}

fn ensemble(cfg: &RunConfig, base: Arc<dyn Forecaster>, train: &[Trajectory]) -> Result<CovariateEnsemble<Arc<dyn Forecaster>>> {
    CovariateEnsemble::fit(base, train, &cfg.backtest_config(), &cfg.gbdt_config(), cfg.seed)
}

/// JSON document wrapping a report with the tool version and config hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub report: BacktestReport,
}

#[derive(Debug, Clone)]
pub struct BacktestOutput {
    pub report: BacktestReport,
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn run_backtest(cfg: &RunConfig, art: &mut Artifacts) -> Result<Vec<BacktestOutput>> {
    let data = load_dataset(cfg)?;
    let (train, test) = trajectory::split(&data, cfg.split_spec())?;
    let bt = cfg.backtest_config();
    let models = build_models(cfg, &train)?;
    let mut out = Vec::new();
    for model in &models {
        let mut report = evaluate(model.as_ref(), &test, &bt, cfg.seed)?;
        report.provenance = cfg.provenance();
        let csv = cfg.output_dir.join(format!("report_{}.csv", model.name()));
        let json = cfg.output_dir.join(format!("report_{}.json", model.name()));
        let tag = format!("command=backtest model={}", model.name());
        art.write(&csv, |buf| report.write_csv(buf, &comments(cfg, &tag)))?;
        let doc = ReportDocument {
            tool: "cfbench".into(),
            version: crate::VERSION.into(),
            config_hash: cfg.hash(),
            report: report.clone(),
        };
        art.write(&json, |buf| {
            serde_json::to_writer_pretty(&mut *buf, &doc)?;
            buf.push(b'\n');
            Ok(())
        })?;
        out.push(BacktestOutput { report, csv, json });
    }
    Ok(out)
}

pub fn read_report(path: &Path) -> Result<BacktestReport> {
    let text = fs::read_to_string(path)?;
    let doc: ReportDocument = serde_json::from_str(&text)?;
    Ok(doc.report)
}

/// Report files in `dir`, sorted by name.
pub fn find_reports(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("report_") && name.ends_with(".json")
        })
        .collect();
    found.sort();
    Ok(found)
}

pub fn run_compare(cfg: &RunConfig, reports: &[PathBuf], reference: Option<&str>, art: &mut Artifacts) -> Result<Ranking> {
    if reports.is_empty() {
        return Err(Error::Config("no reports to compare".into()));
    }
    let loaded = reports.iter().map(|p| read_report(p)).collect::<Result<Vec<_>>>()?;
    let ranking = backtest::compare(&loaded, reference)?;
    let path = cfg.output_dir.join("comparison.txt");
    art.write(&path, |buf| {
        for c in comments(cfg, "command=compare") {
            buf.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        buf.extend_from_slice(ranking.to_string().as_bytes());
        Ok(())
    })?;
    Ok(ranking)
}

/// Writes the context/truth/forecast trace for one test window. Without a
/// trajectory id the first test trajectory (natural order) is used.
pub fn run_trace(cfg: &RunConfig, model: &str, traj_id: Option<&str>, window: usize, art: &mut Artifacts) -> Result<PathBuf> {
    let data = load_dataset(cfg)?;
    let (train, test) = trajectory::split(&data, cfg.split_spec())?;
    let traj = match traj_id {
        Some(id) => test.iter().find(|t| t.id == id).ok_or_else(|| Error::Config(format!("no test trajectory `{id}`")))?,
        None => &test[0],
    };
    let bt = cfg.backtest_config();
    let windows = make_windows(traj, &bt);
    let w = windows.get(window).ok_or_else(|| {
        Error::Config(format!("trajectory {} has {} windows, index {window} requested", traj.id, windows.len()))
    })?;
    let sub = RunConfig {
        models: crate::config::ModelsSection { roster: vec![model.to_string()], covariates: false, ..cfg.models.clone() },
        ..cfg.clone()
    };
    let built = build_models(&sub, &train)?;
    let rows = backtest::trace_window(built[0].as_ref(), traj, w, bt.n_samples, cfg.seed)?;
    let path = cfg.output_dir.join(format!("trace_{model}.csv"));
    let tag = format!("command=trace model={model} traj={} window={window}", traj.id);
    art.write(&path, |buf| backtest::write_trace(&rows, buf, &comments(cfg, &tag)))?;
    Ok(path)
}
