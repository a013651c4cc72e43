use super::{acceleration, IdmParams, SignConvention, MIN_SPACING};
use crate::trajectory::{Sample, Trajectory};
use crate::{Error, Result};

/// Follower state at the first leader sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerInit {
    /// Bumper-to-bumper spacing to the leader, m.
    pub gap: f64,
    /// Follower speed, m/s.
    pub speed: f64,
}

/// Drives an IDM follower behind a recorded leader.
///
/// The leader position is integrated from its speed with the trapezoid rule.
/// The follower uses ballistic updates with step `1 / hz`; its speed never
/// goes negative (a follower that would reverse stops where `v = 0`).
/// Each emitted sample carries the IDM acceleration evaluated at that
/// sample's state, so `predict_accel_series` on the output reproduces
/// `a_f` exactly.
pub fn simulate_follower(
    p: &IdmParams,
    leader: &Trajectory,
    init: FollowerInit,
    conv: SignConvention,
) -> Result<Trajectory> {
    if !(init.gap > 0.0) {
        return Err(Error::Domain(format!("initial gap {} must be positive", init.gap)));
    }
    if init.speed < 0.0 {
        return Err(Error::Domain(format!("initial speed {} must be non-negative", init.speed)));
    }
    let dt = leader.dt();
    let mut x_l = init.gap;
    let mut x_f = 0.0;
    let mut v = init.speed;
    let mut samples = Vec::with_capacity(leader.len());

    for (k, ls) in leader.samples.iter().enumerate() {
        let gap = x_l - x_f;
        if gap < MIN_SPACING {
            return Err(Error::Collision { step: k, gap });
        }
        let a = acceleration(p, v, ls.v_l, gap, conv)?;
        samples.push(Sample { t: ls.t, v_l: ls.v_l, v_f: v, a_l: ls.a_l, a_f: a, gap, dv: v - ls.v_l });

        if let Some(next) = leader.samples.get(k + 1) {
            x_l += 0.5 * (ls.v_l + next.v_l) * dt;
            let v_next = v + a * dt;
            if v_next < 0.0 {
                // Stops within the step.
                x_f += -v * v / (2.0 * a);
                v = 0.0;
            } else {
                x_f += v * dt + 0.5 * a * dt * dt;
                v = v_next;
            }
        }
    }

    Ok(Trajectory { id: leader.id.clone(), hz: leader.hz, samples })
}
