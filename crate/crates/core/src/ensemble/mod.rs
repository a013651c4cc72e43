//! Covariate residual correction.
//!
//! The gap, relative speed and follower speed are each forecast with the base
//! forecaster on their own history. A boosted-tree regressor maps the
//! per-step covariate forecasts `(gap, dv, v_f, h)` to the base forecaster's
//! acceleration error, and its prediction is added back to the base point
//! forecast and to every sample path.

mod gbdt;

pub use gbdt::{fit_gbdt, fit_tree, GbdtConfig, GbdtModel, Node, ResidualDataset, Tree};

use rayon::prelude::*;

use crate::backtest::{make_windows, BacktestConfig, BacktestModel, Window};
use crate::forecast::{Forecast, ForecastRequest, Forecaster};
use crate::stats;
use crate::trajectory::Trajectory;
use crate::{Error, Result};

/// Number of regressor features: three covariate forecasts plus the step.
pub const N_FEATURES: usize = 4;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CovariateSet {
    pub space_gap: Vec<f64>,
    pub speed_diff: Vec<f64>,
    pub speed_fav: Vec<f64>,
    pub target: Vec<f64>,
}

impl CovariateSet {
    pub fn new(space_gap: Vec<f64>, speed_diff: Vec<f64>, speed_fav: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        let n = target.len();
        if space_gap.len() != n || speed_diff.len() != n || speed_fav.len() != n {
            return Err(Error::Contract("covariate series lengths differ".into()));
        }
        Ok(CovariateSet { space_gap, speed_diff, speed_fav, target })
    }

    pub fn from_trajectory(traj: &Trajectory) -> Self {
        CovariateSet {
            space_gap: traj.series(|s| s.gap),
            speed_diff: traj.series(|s| s.dv),
            speed_fav: traj.series(|s| s.v_f),
            target: traj.follower_accel(),
        }
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> CovariateSet {
        CovariateSet {
            space_gap: self.space_gap[range.clone()].to_vec(),
            speed_diff: self.speed_diff[range.clone()].to_vec(),
            speed_fav: self.speed_fav[range.clone()].to_vec(),
            target: self.target[range].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovariateForecasts {
    pub space_gap: Forecast,
    pub speed_diff: Forecast,
    pub speed_fav: Forecast,
}

impl CovariateForecasts {
    /// Regressor features for each horizon step.
    pub fn features(&self) -> Vec<Vec<f64>> {
        (0..self.space_gap.point.len())
            .map(|h| {
                vec![
                    self.space_gap.point[h],
                    self.speed_diff.point[h],
                    self.speed_fav.point[h],
                    (h + 1) as f64,
                ]
            })
            .collect()
    }
}

/// Per-series seed so the three covariate forecasts draw independent streams.
fn covariate_seed(seed: u64, k: u64) -> u64 {
    stats::mix_seed(seed, &[0xC0FA, k])
}

/// Forecasts each covariate of `context` independently with `base`.
pub fn forecast_covariates(
    base: &dyn Forecaster,
    context: &CovariateSet,
    horizon: usize,
    n_samples: usize,
    seed: u64,
) -> Result<CovariateForecasts> {
    let run = |series: &[f64], k: u64| {
        base.forecast(&ForecastRequest::new(series.to_vec(), horizon, n_samples).with_seed(covariate_seed(seed, k)))
    };
    Ok(CovariateForecasts {
        space_gap: run(&context.space_gap, 1)?,
        speed_diff: run(&context.speed_diff, 2)?,
        speed_fav: run(&context.speed_fav, 3)?,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualBuild {
    pub data: ResidualDataset,
    /// Windows shorter than `context + horizon`.
    pub skipped: usize,
}

/// Residual rows from training windows. Each window's last `horizon` samples
/// are the truth and everything before them is the context.
pub fn build_residual_dataset(
    base: &dyn Forecaster,
    windows: &[CovariateSet],
    context: usize,
    horizon: usize,
    n_samples: usize,
    seed: u64,
) -> Result<ResidualBuild> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let per_window: Vec<Option<Vec<(Vec<f64>, f64)>>> = windows
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            if w.len() < context + horizon || w.len() <= horizon {
                return Ok(None);
            }
            let split = w.len() - horizon;
            let ctx = w.slice(0..split);
            let s = stats::mix_seed(seed, &[i as u64]);
            let base_fc = base.forecast(&ForecastRequest::new(ctx.target.clone(), horizon, n_samples).with_seed(s))?;
            let cov = forecast_covariates(base, &ctx, horizon, n_samples, s)?;
            let rows = cov
                .features()
                .into_iter()
                .zip(&w.target[split..])
                .zip(&base_fc.point)
                .map(|((x, truth), pred)| (x, truth - pred))
                .collect();
            Ok(Some(rows))
        })
        .collect::<Result<_>>()?;

    let mut out = ResidualBuild::default();
    for rows in per_window {
        match rows {
            None => out.skipped += 1,
            Some(rows) => {
                for (x, y) in rows {
                    out.data.push(x, y);
                }
            }
        }
    }
    if out.skipped > 0 {
        log::warn!("skipped {} training windows shorter than {}", out.skipped, context + horizon);
    }
    Ok(out)
}

/// Base forecast corrected by the regressor's per-step residual prediction.
pub fn ensemble_forecast(
    base: &dyn Forecaster,
    gbdt: &GbdtModel,
    context: &CovariateSet,
    horizon: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Forecast> {
    if gbdt.n_features != N_FEATURES {
        return Err(Error::Contract(format!(
            "residual model expects {} features, covariate layout has {N_FEATURES}",
            gbdt.n_features
        )));
    }
    let base_fc = base.forecast(&ForecastRequest::new(context.target.clone(), horizon, n_samples).with_seed(seed))?;
    let cov = forecast_covariates(base, context, horizon, n_samples, seed)?;
    let correction: Vec<f64> = cov.features().iter().map(|x| gbdt.predict(x)).collect();
    Ok(base_fc.shifted(&correction))
}

/// Training windows of `train` cut with the backtest protocol, each spanning
/// its context and horizon.
pub fn training_windows(train: &[Trajectory], cfg: &BacktestConfig) -> Vec<CovariateSet> {
    train
        .iter()
        .flat_map(|t| {
            let cov = CovariateSet::from_trajectory(t);
            make_windows(t, cfg).into_iter().map(move |w| cov.slice(w.context.start..w.horizon.end))
        })
        .collect()
}

/// A base forecaster plus its fitted residual model.
pub struct CovariateEnsemble<F> {
    base: F,
    gbdt: GbdtModel,
    name: String,
}

impl<F: Forecaster> CovariateEnsemble<F> {
    pub fn new(base: F, gbdt: GbdtModel) -> Self {
        let name = format!("{}+cov", base.name());
        CovariateEnsemble { base, gbdt, name }
    }

    /// Fits the residual model on windows cut from the training split.
    pub fn fit(base: F, train: &[Trajectory], bt: &BacktestConfig, gbdt_cfg: &GbdtConfig, seed: u64) -> Result<Self> {
        let windows = training_windows(train, bt);
        let built = build_residual_dataset(&base, &windows, bt.context_len, bt.horizon_len, bt.n_samples, seed)?;
        if built.data.is_empty() {
            return Err(Error::Fit("no training windows for the residual model".into()));
        }
        let gbdt = fit_gbdt(&built.data, gbdt_cfg)?;
        Ok(CovariateEnsemble::new(base, gbdt))
    }

    pub fn base(&self) -> &F {
        &self.base
    }

    pub fn gbdt(&self) -> &GbdtModel {
        &self.gbdt
    }
}

impl<F: Forecaster> BacktestModel for CovariateEnsemble<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn forecast_window(&self, traj: &Trajectory, window: &Window, n_samples: usize, seed: u64) -> Result<Forecast> {
        let ctx = CovariateSet::from_trajectory(traj).slice(window.context.clone());
        ensemble_forecast(&self.base, &self.gbdt, &ctx, window.horizon.len(), n_samples, seed)
    }
}
