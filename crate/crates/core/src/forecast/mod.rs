//! Probabilistic forecaster contract and classical baselines.

mod ar;
mod holt;

pub use ar::{ArForecaster, ArModel};
pub use holt::{HoltFit, HoltForecaster};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::stats;
use crate::{Error, Result};

/// Context series, horizon and number of sample paths to draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRequest {
    pub context: Vec<f64>,
    pub horizon: usize,
    pub n_samples: usize,
    /// Seed for any sampling the forecaster performs.
    pub seed: u64,
}

impl ForecastRequest {
    pub fn new(context: Vec<f64>, horizon: usize, n_samples: usize) -> Self {
        ForecastRequest { context, horizon, n_samples, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.context.is_empty() {
            return Err(Error::Domain("empty forecast context".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Domain("forecast horizon must be at least 1".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::Domain("n_samples must be at least 1".into()));
        }
        if self.context.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("forecast context contains non-finite values".into()));
        }
        Ok(())
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Sample paths plus a point forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub samples: Vec<Vec<f64>>,
    pub point: Vec<f64>,
}

impl Forecast {
    /// Point forecast taken as the per-step median of the paths.
    pub fn from_samples(samples: Vec<Vec<f64>>) -> Result<Self> {
        let h = samples.first().map(Vec::len).unwrap_or(0);
        check_rectangular(&samples, h)?;
        let point = (0..h)
            .map(|j| stats::median(&samples.iter().map(|p| p[j]).collect::<Vec<_>>()))
            .collect();
        Ok(Forecast { samples, point })
    }

    /// `n` identical copies of a deterministic path.
    pub fn deterministic(point: Vec<f64>, n: usize) -> Self {
        Forecast { samples: vec![point.clone(); n.max(1)], point }
    }

    pub fn horizon(&self) -> usize {
        self.point.len()
    }

    /// Checks the shape and that the point lies within the sample range.
    pub fn validate(&self, horizon: usize, n_samples: usize) -> Result<()> {
        if self.point.len() != horizon {
            return Err(Error::Contract(format!("point length {} != horizon {horizon}", self.point.len())));
        }
        if self.samples.len() != n_samples {
            return Err(Error::Contract(format!("{} sample paths, expected {n_samples}", self.samples.len())));
        }
        check_rectangular(&self.samples, horizon)?;
        for (h, &pt) in self.point.iter().enumerate() {
            let lo = self.samples.iter().map(|p| p[h]).fold(f64::INFINITY, f64::min);
            let hi = self.samples.iter().map(|p| p[h]).fold(f64::NEG_INFINITY, f64::max);
            if !(pt >= lo && pt <= hi) {
                return Err(Error::Contract(format!("point {pt} at step {h} outside sample range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Adds a per-step offset to the point and every path.
    pub fn shifted(&self, offset: &[f64]) -> Forecast {
        let add = |p: &Vec<f64>| p.iter().zip(offset).map(|(a, b)| a + b).collect::<Vec<_>>();
        Forecast { samples: self.samples.iter().map(add).collect(), point: add(&self.point) }
    }
}

fn check_rectangular(samples: &[Vec<f64>], h: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Contract("forecast has no sample paths".into()));
    }
    if let Some((i, p)) = samples.iter().enumerate().find(|(_, p)| p.len() != h) {
        return Err(Error::Contract(format!("sample path {i} has length {} (expected {h})", p.len())));
    }
    Ok(())
}

/// A univariate probabilistic forecaster. Implementations are immutable
/// after construction and safe to share across threads.
pub trait Forecaster: Send + Sync {
    fn name(&self) -> &str;

    fn forecast(&self, req: &ForecastRequest) -> Result<Forecast>;
}

impl<F: Forecaster + ?Sized> Forecaster for Box<F> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn forecast(&self, req: &ForecastRequest) -> Result<Forecast> {
        (**self).forecast(req)
    }
}

impl<F: Forecaster + ?Sized> Forecaster for std::sync::Arc<F> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn forecast(&self, req: &ForecastRequest) -> Result<Forecast> {
        (**self).forecast(req)
    }
}

/// Repeats the last observed value.
#[derive(Debug, Clone, Copy, Default)]
pub struct Persistence;

impl Forecaster for Persistence {
    fn name(&self) -> &str {
        "persistence"
    }

    fn forecast(&self, req: &ForecastRequest) -> Result<Forecast> {
        req.validate()?;
        let last = *req.context.last().expect("validated non-empty");
        Ok(Forecast::deterministic(vec![last; req.horizon], req.n_samples))
    }
}

/// Builds `n` paths symmetric around `point`: pairs `point ± noise` from
/// successive draws, plus the point itself when `n` is odd. The point is then
/// both the per-step median and inside the sample range.
pub(crate) fn antithetic_paths<G>(point: &[f64], n: usize, mut draw: G) -> Vec<Vec<f64>>
where
    G: FnMut() -> Vec<f64>,
{
    let mut paths = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        let noise = draw();
        paths.push(point.iter().zip(&noise).map(|(p, e)| p + e).collect());
        paths.push(point.iter().zip(&noise).map(|(p, e)| p - e).collect());
    }
    if n % 2 == 1 {
        paths.push(point.to_vec());
    }
    paths
}
