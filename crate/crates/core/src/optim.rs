//! Bounded Nelder-Mead with Latin-hypercube multi-start.
//!
//! Everything here works in the unit hypercube `[0, 1]^n`; callers map to
//! their own parameter ranges. Trial points are projected back onto the box
//! by clamping, so the objective is never evaluated outside it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Initial simplex edge length (unit-cube coordinates).
    pub initial_step: f64,
    /// Converged once the simplex value spread falls below this.
    pub f_tol: f64,
    /// ... and its largest vertex distance from the best falls below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_evals: 2000, initial_step: 0.1, f_tol: 1e-14, x_tol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

fn project(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` over the unit box starting from `x0`.
///
/// After the simplex collapses the search restarts around the incumbent
/// with a fresh simplex until either a restart makes no progress or the
/// evaluation budget is spent.
pub fn nelder_mead<F>(f: &F, x0: &[f64], opts: NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        sanitize(f(x))
    };

    let mut best_x = x0.to_vec();
    project(&mut best_x);
    let mut best_f = eval(&best_x, &mut evals);
    let mut step = opts.initial_step;

    while evals + n < opts.max_evals {
        // Simplex around the incumbent; edges point inward near a bound.
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_f));
        for i in 0..n {
            let mut v = best_x.clone();
            v[i] = if v[i] + step <= 1.0 { v[i] + step } else { v[i] - step };
            project(&mut v);
            let fv = eval(&v, &mut evals);
            simplex.push((v, fv));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if (spread.is_finite() && spread <= opts.f_tol && size <= opts.x_tol) || size <= 1e-15 {
                break;
            }
            if evals + 2 > opts.max_evals {
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64)
                .collect();
            let toward = |coef: f64| -> Vec<f64> {
                let mut p: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + coef * (c - w))
                    .collect();
                project(&mut p);
                p
            };

            let xr = toward(REFLECT);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = toward(EXPAND);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = toward(CONTRACT);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = toward(-CONTRACT);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            if evals + n > opts.max_evals {
                break;
            }
            let best = simplex[0].0.clone();
            for (v, fv) in simplex[1..].iter_mut() {
                for (x, b) in v.iter_mut().zip(&best) {
                    *x = b + SHRINK * (*x - b);
                }
                *fv = eval(v, &mut evals);
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let improved = simplex[0].1 < best_f - opts.f_tol;
        if simplex[0].1 < best_f {
            best_f = simplex[0].1;
            best_x = simplex[0].0.clone();
        }
        if !improved {
            if step <= 1e-4 {
                break;
            }
            step *= 0.1;
        }
    }

    Minimum { x: best_x, value: best_f, evals }
}

/// Latin-hypercube design of `count` points in `[0, 1]^dim`.
pub fn latin_hypercube(count: usize, dim: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; count];
    for d in 0..dim {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(rng);
        for (p, s) in points.iter_mut().zip(strata) {
            p[d] = (s as f64 + rng.random::<f64>()) / count as f64;
        }
    }
    points
}

/// Runs Nelder-Mead from every Latin-hypercube start in parallel and keeps
/// the best result (ties go to the lower start index).
pub fn multistart<F>(f: &F, dim: usize, starts: usize, budget: usize, seed: u64) -> Minimum
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let design = latin_hypercube(starts, dim, &mut rng);
    let per_start = budget / starts.max(1);
    let opts = NelderMeadOptions { max_evals: per_start, ..Default::default() };
    let results: Vec<Minimum> = design.par_iter().map(|x0| nelder_mead(f, x0, opts)).collect();
    let evals = results.iter().map(|r| r.evals).sum();
    let mut best = results
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one start");
    best.evals = evals;
    best
}
