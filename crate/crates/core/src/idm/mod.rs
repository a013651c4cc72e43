//! Intelligent Driver Model.
//!
//! ```text
//! a_f = a_max * [1 - (v_f / v_d)^c0 - (d* / s)^c1]
//! d*  = d + c2 * sqrt(v_f / v_d) + v_f * tau + v_f * Δv / (2 * sqrt(a_max * |b_d|))
//! ```
//!
//! `Δv` depends on the [`SignConvention`]: `v_f - v_l` for the classic
//! closing-rate form, `v_l - v_f` for the literal published variant.

mod calibrate;
mod simulate;

pub use calibrate::{calibrate, Calibration, CalibrationConfig, IdmBounds};
pub use simulate::{simulate_follower, FollowerInit};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::trajectory::Trajectory;
use crate::{Error, Result};

/// Lower clamp on the desired gap, m.
pub const MIN_DESIRED_GAP: f64 = 0.01;
/// Spacings below this are rejected, m.
pub const MIN_SPACING: f64 = 0.01;
/// Physical guard on the returned acceleration, m/s².
pub const ACCEL_LIMIT: f64 = 10.0;
/// 130 km/h in m/s.
pub const FREE_FLOW_SPEED: f64 = 130.0 / 3.6;

/// Admissible parameter ranges.
pub const A_MAX_RANGE: (f64, f64) = (0.73, 5.0);
pub const C0_RANGE: (f64, f64) = (0.2, 20.0);
pub const D_RANGE: (f64, f64) = (0.0, 17.0);
pub const TAU_RANGE: (f64, f64) = (1.0, 2.5);
pub const B_D_RANGE: (f64, f64) = (2.0, 9.0);
pub const C2_RANGE: (f64, f64) = (0.0, 10.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Δv = v_f − v_l: closing on the leader enlarges the desired gap.
    #[default]
    Treiber2000,
    /// Δv = v_l − v_f: closing on the leader shrinks the desired gap.
    Reversed,
}

impl SignConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            SignConvention::Treiber2000 => "treiber2000",
            SignConvention::Reversed => "reversed",
        }
    }

    fn delta_v(self, v_f: f64, v_l: f64) -> f64 {
        match self {
            SignConvention::Treiber2000 => v_f - v_l,
            SignConvention::Reversed => v_l - v_f,
        }
    }
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "treiber2000" | "treiber" => Ok(SignConvention::Treiber2000),
            "reversed" => Ok(SignConvention::Reversed),
            other => Err(Error::Config(format!("unknown sign convention `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    /// Maximum acceleration, m/s².
    pub a_max: f64,
    /// Desired speed, m/s.
    pub v_d: f64,
    /// Acceleration exponent.
    pub c0: f64,
    /// Gap exponent.
    pub c1: f64,
    /// Square-root speed term coefficient, m.
    pub c2: f64,
    /// Standstill distance, m.
    pub d: f64,
    /// Time gap, s.
    pub tau: f64,
    /// Comfortable deceleration, m/s².
    pub b_d: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        IdmParams { a_max: 1.5, v_d: FREE_FLOW_SPEED, c0: 4.0, c1: 2.0, c2: 0.0, d: 2.0, tau: 1.5, b_d: 3.0 }
    }
}

fn check_range(name: &str, value: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if !(value >= lo && value <= hi) {
        return Err(Error::Config(format!("{name} = {value} outside [{lo}, {hi}]")));
    }
    Ok(())
}

impl IdmParams {
    /// Checks the admissible ranges; `c2` is checked only when nonzero.
    pub fn validate(&self) -> Result<()> {
        check_range("a_max", self.a_max, A_MAX_RANGE)?;
        check_range("c0", self.c0, C0_RANGE)?;
        check_range("d", self.d, D_RANGE)?;
        check_range("tau", self.tau, TAU_RANGE)?;
        check_range("b_d", self.b_d, B_D_RANGE)?;
        check_range("c2", self.c2, C2_RANGE)?;
        if !(self.v_d > 0.0 && self.v_d.is_finite()) {
            return Err(Error::Config(format!("v_d = {} must be positive", self.v_d)));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(Error::Config(format!("c1 = {} must be positive", self.c1)));
        }
        Ok(())
    }

    /// Flat `name = value` text with the convention and achieved RMSE.
    pub fn to_param_file(&self, convention: SignConvention, rmse: Option<f64>, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            s.push_str(&format!("# {c}\n"));
        }
        for (k, v) in [
            ("a_max", self.a_max),
            ("v_d", self.v_d),
            ("c0", self.c0),
            ("c1", self.c1),
            ("c2", self.c2),
            ("d", self.d),
            ("tau", self.tau),
            ("b_d", self.b_d),
        ] {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s.push_str(&format!("convention = {convention}\n"));
        if let Some(r) = rmse {
            s.push_str(&format!("rmse = {r}\n"));
        }
        s
    }

    /// Parses the format written by [`IdmParams::to_param_file`].
    pub fn from_param_file(text: &str) -> Result<(IdmParams, SignConvention, Option<f64>)> {
        let mut p = IdmParams::default();
        let mut conv = SignConvention::default();
        let mut rmse = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `name = value`", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "convention" {
                conv = v.parse()?;
                continue;
            }
            let x: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number `{v}`", lineno + 1)))?;
            match k {
                "a_max" => p.a_max = x,
                "v_d" => p.v_d = x,
                "c0" => p.c0 = x,
                "c1" => p.c1 = x,
                "c2" => p.c2 = x,
                "d" => p.d = x,
                "tau" => p.tau = x,
                "b_d" => p.b_d = x,
                "rmse" => rmse = Some(x),
                other => return Err(Error::Parse(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        p.validate()?;
        Ok((p, conv, rmse))
    }
}

/// Desired dynamic gap `d*`, clamped to at least [`MIN_DESIRED_GAP`].
pub fn desired_gap(p: &IdmParams, v_f: f64, v_l: f64, conv: SignConvention) -> f64 {
    let dv = conv.delta_v(v_f, v_l);
    let g = p.d
        + p.c2 * (v_f / p.v_d).sqrt()
        + v_f * p.tau
        + v_f * dv / (2.0 * (p.a_max * p.b_d.abs()).sqrt());
    g.max(MIN_DESIRED_GAP)
}

/// Follower acceleration for the given state, clamped to ±[`ACCEL_LIMIT`].
pub fn acceleration(p: &IdmParams, v_f: f64, v_l: f64, spacing: f64, conv: SignConvention) -> Result<f64> {
    if !(spacing >= MIN_SPACING) {
        return Err(Error::Domain(format!("spacing {spacing} m below {MIN_SPACING} m")));
    }
    let ds = desired_gap(p, v_f, v_l, conv);
    let a = p.a_max * (1.0 - (v_f / p.v_d).powf(p.c0) - (ds / spacing).powf(p.c1));
    Ok(a.clamp(-ACCEL_LIMIT, ACCEL_LIMIT))
}

/// One-step prediction at every sample from the observed state.
pub fn predict_accel_series(p: &IdmParams, traj: &Trajectory, conv: SignConvention) -> Result<Vec<f64>> {
    traj.samples
        .iter()
        .map(|s| acceleration(p, s.v_f, s.v_l, s.gap, conv))
        .collect()
}

/// Spacing at which a follower driving at the leader's speed `v` has zero
/// acceleration under the classic convention. `None` at or above `v_d`.
pub fn equilibrium_spacing(p: &IdmParams, v: f64) -> Option<f64> {
    let free = 1.0 - (v / p.v_d).powf(p.c0);
    if free <= 0.0 {
        return None;
    }
    Some(desired_gap(p, v, v, SignConvention::Treiber2000) / free.powf(1.0 / p.c1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> IdmParams {
        IdmParams { a_max: 2.0, v_d: 36.0, c0: 4.0, c1: 2.0, c2: 0.0, d: 2.0, tau: 1.5, b_d: 3.0 }
    }

    #[test]
    fn desired_gap_at_standstill_is_d() {
        let p = example();
        assert_eq!(desired_gap(&p, 0.0, 17.0, SignConvention::Treiber2000), 2.0);
        assert_eq!(desired_gap(&p, 0.0, 17.0, SignConvention::Reversed), 2.0);
    }

    #[test]
    fn desired_gap_both_conventions() {
        let p = example();
        let closing = 100.0 / (2.0 * 6f64.sqrt());
        let rev = desired_gap(&p, 20.0, 25.0, SignConvention::Reversed);
        let treiber = desired_gap(&p, 20.0, 25.0, SignConvention::Treiber2000);
        assert!((rev - (32.0 + closing)).abs() < 1e-12);
        assert!((rev - 52.41).abs() < 0.005);
        assert!((treiber - 11.59).abs() < 0.005);
    }

    #[test]
    fn desired_gap_clamped_positive() {
        let p = IdmParams { d: 0.0, tau: 1.0, ..example() };
        // Strongly opening gap drives the raw value negative.
        let g = desired_gap(&p, 30.0, 0.0, SignConvention::Reversed);
        assert_eq!(g, MIN_DESIRED_GAP);
    }

    #[test]
    fn acceleration_example() {
        let a = acceleration(&example(), 20.0, 25.0, 30.0, SignConvention::Reversed).unwrap();
        assert!((a - -4.295).abs() < 0.001, "{a}");
    }

    #[test]
    fn equilibria() {
        let p = example();
        let a = acceleration(&p, 0.0, 0.0, p.d, SignConvention::Treiber2000).unwrap();
        assert_eq!(a, 0.0);
        let a = acceleration(&p, p.v_d, p.v_d, 1e12, SignConvention::Treiber2000).unwrap();
        assert!(a.abs() < 1e-9);
        let s = equilibrium_spacing(&p, 20.0).unwrap();
        let a = acceleration(&p, 20.0, 20.0, s, SignConvention::Treiber2000).unwrap();
        assert!(a.abs() < 1e-12);
        assert!(equilibrium_spacing(&p, p.v_d).is_none());
    }

    #[test]
    fn spacing_domain() {
        assert!(matches!(
            acceleration(&example(), 10.0, 10.0, 0.0, SignConvention::Treiber2000),
            Err(Error::Domain(_))
        ));
        assert!(acceleration(&example(), 10.0, 10.0, 0.005, SignConvention::Treiber2000).is_err());
    }

    #[test]
    fn clamped_to_physical_guard() {
        let a = acceleration(&example(), 30.0, 0.0, 0.5, SignConvention::Treiber2000).unwrap();
        assert_eq!(a, -ACCEL_LIMIT);
    }

    #[test]
    fn validation_ranges() {
        assert!(IdmParams::default().validate().is_ok());
        assert!(IdmParams { tau: 0.5, ..Default::default() }.validate().is_err());
        assert!(IdmParams { a_max: 6.0, ..Default::default() }.validate().is_err());
        assert!(IdmParams { d: -0.1, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn param_file_round_trip() {
        let p = IdmParams { a_max: 1.234, tau: 1.7, ..Default::default() };
        let text = p.to_param_file(SignConvention::Reversed, Some(0.25), &["hello".into()]);
        let (q, conv, rmse) = IdmParams::from_param_file(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(conv, SignConvention::Reversed);
        assert_eq!(rmse, Some(0.25));
        assert!(IdmParams::from_param_file("tau = 0.5\n").is_err());
        assert!(IdmParams::from_param_file("bogus = 1\n").is_err());
    }
}
