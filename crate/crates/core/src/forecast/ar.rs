//! Autoregressive baseline fitted by ordinary least squares with an
//! intercept; sample paths come from a residual bootstrap.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{antithetic_paths, Forecast, ForecastRequest, Forecaster};
use crate::{Error, Result};

/// Relative singular-value cutoff below which the lag matrix is singular.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    pub intercept: f64,
    /// `coefs[i]` multiplies the value `i + 1` steps back.
    pub coefs: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl ArModel {
    pub fn order(&self) -> usize {
        self.coefs.len()
    }

    pub fn fit(series: &[f64], order: usize) -> Result<ArModel> {
        if order == 0 {
            return Err(Error::Config("AR order must be at least 1".into()));
        }
        if series.len() < 2 * order + 1 {
            return Err(Error::Domain(format!(
                "AR({order}) needs at least {} values, got {}",
                2 * order + 1,
                series.len()
            )));
        }
        let first = series[0];
        if series.iter().all(|&x| x == first) {
            // Degenerate but exact: the constant is its own forecast.
            return Ok(ArModel {
                intercept: first,
                coefs: vec![0.0; order],
                residuals: vec![0.0; series.len() - order],
            });
        }

        let rows = series.len() - order;
        let x = DMatrix::from_fn(rows, order + 1, |r, c| if c == 0 { 1.0 } else { series[order + r - c] });
        let y = DVector::from_iterator(rows, series[order..].iter().copied());
        let svd = x.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > RANK_TOL * smax) {
            return Err(Error::Fit(format!(
                "singular lag matrix for AR({order}); try a lower order"
            )));
        }
        let beta = svd.solve(&y, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
        let residuals = (&y - &x * &beta).iter().copied().collect();
        Ok(ArModel { intercept: beta[0], coefs: beta.iter().skip(1).copied().collect(), residuals })
    }

    /// Recursive forecast with an additive shock sequence (zeros for the point).
    pub fn simulate(&self, history: &[f64], shocks: &[f64]) -> Vec<f64> {
        let mut buf: Vec<f64> = history[history.len() - self.order()..].to_vec();
        let mut out = Vec::with_capacity(shocks.len());
        for &e in shocks {
            let n = buf.len();
            let next = self.intercept
                + self.coefs.iter().enumerate().map(|(i, c)| c * buf[n - 1 - i]).sum::<f64>()
                + e;
            buf.push(next);
            out.push(next);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ArForecaster {
    order: usize,
}

impl Default for ArForecaster {
    fn default() -> Self {
        ArForecaster { order: 10 }
    }
}

impl ArForecaster {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("AR order must be at least 1".into()));
        }
        Ok(ArForecaster { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl Forecaster for ArForecaster {
    fn name(&self) -> &str {
        "ar"
    }

    fn forecast(&self, req: &ForecastRequest) -> Result<Forecast> {
        req.validate()?;
        let model = ArModel::fit(&req.context, self.order)?;
        let point = model.simulate(&req.context, &vec![0.0; req.horizon]);
        if model.residuals.iter().all(|&r| r == 0.0) {
            return Ok(Forecast::deterministic(point, req.n_samples));
        }
        let mut rng = req.rng();
        let res = &model.residuals;
        let samples = antithetic_paths(&point, req.n_samples, || {
            let shocks: Vec<f64> = (0..req.horizon).map(|_| res[rng.random_range(0..res.len())]).collect();
            // The recursion is affine in the shocks, so the deviation from the
            // point path is odd in them and mirrored paths stay symmetric.
            model.simulate(&req.context, &shocks).iter().zip(&point).map(|(s, p)| s - p).collect()
        });
        Ok(Forecast { samples, point })
    }
}
