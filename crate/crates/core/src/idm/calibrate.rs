use serde::{Deserialize, Serialize};

use super::{
    acceleration, IdmParams, SignConvention, A_MAX_RANGE, B_D_RANGE, C0_RANGE, C2_RANGE, D_RANGE, TAU_RANGE,
};
use crate::optim;
use crate::trajectory::Trajectory;
use crate::{Error, Result};

/// Search ranges for the free parameters. `c2` is calibrated only when its
/// range is set; otherwise it stays at the base value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmBounds {
    pub a_max: (f64, f64),
    pub c0: (f64, f64),
    pub d: (f64, f64),
    pub tau: (f64, f64),
    pub b_d: (f64, f64),
    pub c2: Option<(f64, f64)>,
}

impl Default for IdmBounds {
    fn default() -> Self {
        IdmBounds { a_max: A_MAX_RANGE, c0: C0_RANGE, d: D_RANGE, tau: TAU_RANGE, b_d: B_D_RANGE, c2: None }
    }
}

impl IdmBounds {
    fn ranges(&self) -> Vec<(&'static str, (f64, f64), (f64, f64))> {
        let mut r = vec![
            ("a_max", self.a_max, A_MAX_RANGE),
            ("c0", self.c0, C0_RANGE),
            ("d", self.d, D_RANGE),
            ("tau", self.tau, TAU_RANGE),
            ("b_d", self.b_d, B_D_RANGE),
        ];
        if let Some(c2) = self.c2 {
            r.push(("c2", c2, C2_RANGE));
        }
        r
    }

    /// Every range must be ordered and sit inside the admissible range.
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi), (min, max)) in self.ranges() {
            if !(lo <= hi) || lo < min || hi > max {
                return Err(Error::Config(format!(
                    "bounds for {name} [{lo}, {hi}] not within admissible [{min}, {max}]"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.ranges().len()
    }

    /// Maps a unit-cube point to parameters on top of `base`.
    pub fn to_params(&self, base: &IdmParams, unit: &[f64]) -> IdmParams {
        let lerp = |(lo, hi): (f64, f64), u: f64| lo + u.clamp(0.0, 1.0) * (hi - lo);
        let mut p = *base;
        p.a_max = lerp(self.a_max, unit[0]);
        p.c0 = lerp(self.c0, unit[1]);
        p.d = lerp(self.d, unit[2]);
        p.tau = lerp(self.tau, unit[3]);
        p.b_d = lerp(self.b_d, unit[4]);
        if let Some(c2) = self.c2 {
            p.c2 = lerp(c2, unit[5]);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub bounds: IdmBounds,
    pub convention: SignConvention,
    /// Total objective evaluations across all starts.
    pub budget: usize,
    /// Latin-hypercube starts.
    pub starts: usize,
    pub seed: u64,
    /// Supplies the fixed parameters (`v_d`, `c1`, and `c2` unless calibrated).
    pub base: IdmParams,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            bounds: IdmBounds::default(),
            convention: SignConvention::default(),
            budget: 16 * 600,
            starts: 16,
            seed: 0,
            base: IdmParams::default(),
        }
    }
}

impl CalibrationConfig {
    /// Smallest budget that gives every start one full simplex.
    pub fn min_budget(&self) -> usize {
        self.starts * (self.bounds.dim() + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub params: IdmParams,
    pub rmse: f64,
    pub evaluations: usize,
}

/// Pooled RMSE of one-step IDM predictions over every training sample.
fn pooled_rmse(p: &IdmParams, train: &[Trajectory], conv: SignConvention) -> f64 {
    let mut sse = 0.0;
    let mut n = 0usize;
    for traj in train {
        for s in &traj.samples {
            match acceleration(p, s.v_f, s.v_l, s.gap, conv) {
                Ok(a) => sse += (a - s.a_f).powi(2),
                Err(_) => return f64::INFINITY,
            }
            n += 1;
        }
    }
    (sse / n as f64).sqrt()
}

/// Fits IDM parameters by minimizing the pooled one-step acceleration RMSE
/// with multi-start bounded Nelder-Mead.
pub fn calibrate(train: &[Trajectory], cfg: &CalibrationConfig) -> Result<Calibration> {
    if train.iter().all(|t| t.is_empty()) {
        return Err(Error::Config("calibration needs at least one non-empty trajectory".into()));
    }
    cfg.bounds.validate()?;
    if cfg.starts == 0 {
        return Err(Error::Config("calibration needs at least one start".into()));
    }
    if cfg.budget < cfg.min_budget() {
        return Err(Error::Config(format!(
            "budget {} below minimum {} for {} starts",
            cfg.budget,
            cfg.min_budget(),
            cfg.starts
        )));
    }
    // Free parameters are overwritten by the search; only fixed ones matter here.
    let base = cfg.base;
    if cfg.bounds.c2.is_none() {
        super::check_range("c2", base.c2, C2_RANGE)?;
    }
    if !(base.v_d > 0.0 && base.c1 > 0.0) {
        return Err(Error::Config(format!("fixed v_d = {} and c1 = {} must be positive", base.v_d, base.c1)));
    }

    let objective = |u: &[f64]| pooled_rmse(&cfg.bounds.to_params(&base, u), train, cfg.convention);
    let best = optim::multistart(&objective, cfg.bounds.dim(), cfg.starts, cfg.budget, cfg.seed);
    let params = cfg.bounds.to_params(&base, &best.x);
    Ok(Calibration { params, rmse: best.value, evaluations: best.evals })
}
