//! Holt's linear method (additive error, additive trend, no season).
//!
//! ```text
//! level:    l_t = α x_t + (1 − α)(l_{t−1} + b_{t−1})
//! trend:    b_t = β (l_t − l_{t−1}) + (1 − β) b_{t−1}
//! forecast: x̂_{t+h} = l_t + h b_t
//! ```
//!
//! Initialized with `l_0 = x_0`, `b_0 = x_1 − x_0`. The smoothing pair is the
//! grid point with the smallest in-sample one-step SSE (first in grid order
//! on ties).

use rand_distr::{Distribution, Normal};

use super::{antithetic_paths, Forecast, ForecastRequest, Forecaster};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoltFit {
    pub alpha: f64,
    pub beta: f64,
    pub level: f64,
    pub trend: f64,
    pub sse: f64,
    /// Root mean squared one-step error.
    pub sigma: f64,
}

impl HoltFit {
    pub fn point(&self, horizon: usize) -> Vec<f64> {
        (1..=horizon).map(|h| self.level + h as f64 * self.trend).collect()
    }
}

/// One pass of the smoother: final level, trend and one-step SSE.
pub(crate) fn smooth(xs: &[f64], alpha: f64, beta: f64) -> (f64, f64, f64) {
    let mut level = xs[0];
    let mut trend = xs[1] - xs[0];
    let mut sse = 0.0;
    for &x in &xs[1..] {
        let fitted = level + trend;
        sse += (x - fitted).powi(2);
        let prev = level;
        level = alpha * x + (1.0 - alpha) * (level + trend);
        trend = beta * (level - prev) + (1.0 - beta) * trend;
    }
    (level, trend, sse)
}

#[derive(Debug, Clone)]
pub struct HoltForecaster {
    grid: Vec<f64>,
}

impl Default for HoltForecaster {
    fn default() -> Self {
        HoltForecaster { grid: Self::default_grid() }
    }
}

impl HoltForecaster {
    /// `{0.05, 0.10, ..., 0.95}`, shared by α and β.
    pub fn default_grid() -> Vec<f64> {
        (1..=19).map(|k| k as f64 * 0.05).collect()
    }

    pub fn with_grid(grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
            return Err(Error::Config("Holt grid values must lie in (0, 1)".into()));
        }
        Ok(HoltForecaster { grid })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn fit(&self, context: &[f64]) -> Result<HoltFit> {
        if context.len() < 3 {
            return Err(Error::Domain(format!("Holt needs at least 3 context values, got {}", context.len())));
        }
        let mut best: Option<HoltFit> = None;
        for &alpha in &self.grid {
            for &beta in &self.grid {
                let (level, trend, sse) = smooth(context, alpha, beta);
                if best.is_none_or(|b| sse < b.sse) {
                    let sigma = (sse / (context.len() - 1) as f64).sqrt();
                    best = Some(HoltFit { alpha, beta, level, trend, sse, sigma });
                }
            }
        }
        Ok(best.expect("non-empty grid"))
    }
}

impl Forecaster for HoltForecaster {
    fn name(&self) -> &str {
        "holt"
    }

    fn forecast(&self, req: &ForecastRequest) -> Result<Forecast> {
        req.validate()?;
        let fit = self.fit(&req.context)?;
        let point = fit.point(req.horizon);
        if !(fit.sigma > 0.0) || !fit.sigma.is_finite() {
            return Ok(Forecast::deterministic(point, req.n_samples));
        }
        let normal = Normal::new(0.0, fit.sigma).map_err(|e| Error::Fit(e.to_string()))?;
        let mut rng = req.rng();
        let samples = antithetic_paths(&point, req.n_samples, || {
            (0..req.horizon).map(|_| normal.sample(&mut rng)).collect()
        });
        Ok(Forecast { samples, point })
    }
}
