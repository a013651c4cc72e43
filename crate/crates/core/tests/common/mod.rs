//! Synthetic car-following data shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use cfbench::idm::{self, equilibrium_spacing, simulate_follower, FollowerInit, IdmParams, SignConvention};
use cfbench::trajectory::{Sample, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HZ: f64 = 10.0;

/// Ground-truth parameters for generated data.
pub fn truth_params() -> IdmParams {
    IdmParams { a_max: 1.2, c0: 4.0, d: 2.5, tau: 1.4, b_d: 2.5, ..IdmParams::default() }
}

/// Leader speed made of two random sinusoids around a random cruise speed.
pub fn leader(id: &str, len: usize, rng: &mut impl Rng) -> Trajectory {
    let base = rng.random_range(12.0..22.0);
    let (a1, p1, f1) = (rng.random_range(2.0..5.0), rng.random_range(20.0..40.0), rng.random_range(0.0..2.0 * PI));
    let (a2, p2, f2) = (rng.random_range(0.3..1.0), rng.random_range(5.0..12.0), rng.random_range(0.0..2.0 * PI));
    let samples = (0..len)
        .map(|i| {
            let t = i as f64 / HZ;
            let w1 = 2.0 * PI / p1;
            let w2 = 2.0 * PI / p2;
            let v = base + a1 * (w1 * t + f1).sin() + a2 * (w2 * t + f2).sin();
            let a = a1 * w1 * (w1 * t + f1).cos() + a2 * w2 * (w2 * t + f2).cos();
            Sample { t, v_l: v, v_f: 0.0, a_l: a, a_f: 0.0, gap: 0.0, dv: 0.0 }
        })
        .collect();
    Trajectory { id: id.into(), hz: HZ, samples }
}

/// Noise-free IDM followers behind random leaders, starting at equilibrium.
pub fn idm_dataset(p: &IdmParams, n_traj: usize, len: usize, seed: u64) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_traj)
        .map(|k| {
            let lead = leader(&k.to_string(), len, &mut rng);
            let v0 = lead.samples[0].v_l;
            let gap = equilibrium_spacing(p, v0).expect("below desired speed");
            simulate_follower(p, &lead, FollowerInit { gap, speed: v0 }, SignConvention::Treiber2000).expect("no collision")
        })
        .collect()
}

/// IDM followers whose acceleration carries an AR(1) disturbance, integrated
/// with the same ballistic scheme as the noise-free simulator.
pub fn stochastic_idm_dataset(p: &IdmParams, n_traj: usize, len: usize, sigma: f64, seed: u64) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = 1.0 / HZ;
    (0..n_traj)
        .map(|k| {
            let lead = leader(&k.to_string(), len, &mut rng);
            let v0 = lead.samples[0].v_l;
            let mut gap = equilibrium_spacing(p, v0).unwrap();
            let mut v = v0;
            let mut eta = 0.0;
            let mut samples = Vec::with_capacity(len);
            for (i, ls) in lead.samples.iter().enumerate() {
                let a_idm = idm::acceleration(p, v, ls.v_l, gap, SignConvention::Treiber2000).unwrap();
                let a = (a_idm + eta).clamp(-idm::ACCEL_LIMIT, idm::ACCEL_LIMIT);
                samples.push(Sample { t: ls.t, v_l: ls.v_l, v_f: v, a_l: ls.a_l, a_f: a, gap, dv: v - ls.v_l });
                eta = 0.9 * eta + sigma * rng.random_range(-1.0..1.0);
                if let Some(next) = lead.samples.get(i + 1) {
                    let v_next = (v + a * dt).max(0.0);
                    let dx_f = 0.5 * (v + v_next) * dt;
                    gap += 0.5 * (ls.v_l + next.v_l) * dt - dx_f;
                    v = v_next;
                }
            }
            Trajectory { id: k.to_string(), hz: HZ, samples }
        })
        .collect()
}

/// Canonical CSV text of a dataset.
pub fn to_csv(data: &[Trajectory]) -> String {
    let mut buf = Vec::new();
    cfbench::trajectory::write_csv(data, &mut buf, &[]).unwrap();
    String::from_utf8(buf).unwrap()
}
