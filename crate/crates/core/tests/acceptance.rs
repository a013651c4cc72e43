//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so every line is visible under `cargo test`. The
//! process exits nonzero when any gating check fails; data-dependent checks
//! that need external files print SKIP when the files are absent.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use cfbench::backtest::{
    evaluate, nominal_window_count, BacktestConfig, BacktestModel, IdmModel, Univariate, Window,
};
use cfbench::config::RunConfig;
use cfbench::ensemble::{fit_gbdt, fit_tree, CovariateEnsemble, GbdtConfig, Node, ResidualDataset};
use cfbench::forecast::{Forecast, ForecastRequest, Forecaster, HoltForecaster, Persistence};
use cfbench::idm::{self, calibrate, CalibrationConfig, IdmParams, SignConvention};
use cfbench::interop::{run_conformance, AdapterEndpoint};
use cfbench::pipeline::{self, Artifacts};
use cfbench::token::{
    build_corpus, detokenize, fit_ngram, tokenize, tokenize_with_scale, NgramModel, Token, TokenForecaster,
    TokenForecasterConfig, TokenVocab,
};
use cfbench::trajectory::{self, Sample, Trajectory};
use cfbench::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

struct Suite {
    failures: usize,
}

impl Suite {
    fn check(&mut self, name: &str, f: impl FnOnce() -> Outcome) {
        let t0 = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        if !pass {
            self.failures += 1;
        }
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{status}  {name}: {detail} [{:.2}s]", t0.elapsed().as_secs_f64());
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_params(r: &mut impl Rng, c2: f64) -> IdmParams {
    IdmParams {
        a_max: r.random_range(idm::A_MAX_RANGE.0..=idm::A_MAX_RANGE.1),
        c0: r.random_range(idm::C0_RANGE.0..=idm::C0_RANGE.1),
        d: r.random_range(0.01..=idm::D_RANGE.1),
        tau: r.random_range(idm::TAU_RANGE.0..=idm::TAU_RANGE.1),
        b_d: r.random_range(idm::B_D_RANGE.0..=idm::B_D_RANGE.1),
        c2,
        ..IdmParams::default()
    }
}

const CONVENTIONS: [SignConvention; 2] = [SignConvention::Treiber2000, SignConvention::Reversed];

fn idm_equilibria() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(11);
    let (mut worst_stand, mut worst_free, mut violations) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..10_000 {
        let p = random_params(&mut r, 0.0);
        for conv in CONVENTIONS {
            worst_stand = worst_stand.max(idm::acceleration(&p, 0.0, 0.0, p.d, conv).unwrap().abs());
            worst_free = worst_free.max(idm::acceleration(&p, p.v_d, p.v_d, 1e12, conv).unwrap().abs());
        }
        let c2 = r.random_range(0.0..=idm::C2_RANGE.1);
        let q = random_params(&mut r, c2);
        let v_f = r.random_range(0.0..q.v_d);
        let v_l = r.random_range(0.0..40.0);
        let s1 = r.random_range(idm::MIN_SPACING..300.0);
        let s2 = r.random_range(s1..=300.0);
        for conv in CONVENTIONS {
            if idm::acceleration(&q, v_f, v_l, s1, conv).unwrap() > idm::acceleration(&q, v_f, v_l, s2, conv).unwrap() {
                violations += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    (
        worst_stand < 1e-9 && worst_free < 1e-9 && violations == 0 && secs < 5.0,
        format!("max |a| standstill {worst_stand:.1e}, free flow {worst_free:.1e}; {violations} monotonicity violations in 10^4 draws; {secs:.2}s < 5s"),
    )
}

fn idm_oracle() -> Outcome {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/oracles/idm_oracle.csv");
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let mut worst = 0.0f64;
    let mut rows = 0;
    for rec in rdr.records() {
        let v: Vec<f64> = rec.unwrap().iter().map(|x| x.parse().unwrap()).collect();
        let p = IdmParams { a_max: v[0], v_d: v[1], c0: v[2], c1: v[3], c2: v[4], d: v[5], tau: v[6], b_d: v[7] };
        let (v_f, v_l, s) = (v[8], v[9], v[10]);
        for (conv, gap_o, acc_o) in [(SignConvention::Treiber2000, v[11], v[13]), (SignConvention::Reversed, v[12], v[14])] {
            let g = idm::desired_gap(&p, v_f, v_l, conv);
            let a = idm::acceleration(&p, v_f, v_l, s, conv).unwrap();
            worst = worst.max(((g - gap_o) / gap_o).abs()).max(((a - acc_o) / acc_o).abs());
        }
        rows += 1;
    }
    (rows == 100 && worst < 1e-10, format!("{rows} tuples x 2 conventions, max relative error {worst:.2e} < 1e-10"))
}

fn calibration_recovery() -> Outcome {
    let data = common::idm_dataset(&common::truth_params(), 4, 500, 21);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let t0 = Instant::now();
    let cal = pool.install(|| calibrate(&data, &CalibrationConfig { seed: 3, ..Default::default() })).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    (
        cal.rmse <= 0.05 && secs < 60.0,
        format!("train RMSE {:.2e} <= 0.05 m/s2 after {} evaluations on one thread in {secs:.1}s < 60s", cal.rmse, cal.evaluations),
    )
}

fn tokenizer() -> Outcome {
    let vocab = TokenVocab::default();
    let mut r = rng(5);
    let (mut worst_ratio, mut mismatches, mut series) = (0.0f64, 0usize, 0usize);
    while series < 1000 {
        let n = r.random_range(1..200);
        let mag = 10f64.powf(r.random_range(-3.0..3.0));
        let xs: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0) * mag).collect();
        let (toks, scale) = tokenize(&xs, &vocab);
        if xs.iter().any(|x| (x / scale).abs() > vocab.clip()) {
            continue;
        }
        series += 1;
        let back = detokenize(&toks.tokens, scale, &vocab).unwrap();
        let bound = 0.5 * vocab.bin_width() * scale;
        for (x, y) in xs.iter().zip(&back) {
            worst_ratio = worst_ratio.max((x - y).abs() / bound);
        }
        for k in [r.random_range(1e-3..1e3), 2.0, 0.125, 1024.0] {
            let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
            if tokenize(&scaled, &vocab).0 != toks {
                mismatches += 1;
            }
        }
    }
    (
        worst_ratio <= 1.0 + 1e-12 && mismatches == 0,
        format!("1000 in-range series: max error / (bin_width/2 * scale) = {worst_ratio:.6}; {mismatches} token mismatches under 4000 positive rescalings"),
    )
}

fn pooled_cross_entropy(m: &NgramModel, corpus: &[cfbench::token::TokenSeries]) -> f64 {
    let (mut total, mut count) = (0.0, 0usize);
    for s in corpus.iter().filter(|s| s.len() >= m.order()) {
        let n = s.len() + 1 - m.order();
        total += m.cross_entropy(&s.tokens).unwrap() * n as f64;
        count += n;
    }
    total / count as f64
}

fn token_pipeline() -> Outcome {
    let vocab = TokenVocab::default();
    let v = vocab.size();
    let mut r = rng(8);
    let random: Vec<Token> = (0..500).map(|_| Token(r.random_range(0..v as u32))).collect();
    let uniform_ce = NgramModel::uniform(4, v).cross_entropy(&random).unwrap();
    let uniform_ok = (uniform_ce - (v as f64).ln()).abs() <= 1e-12;

    let train: Vec<Vec<f64>> = common::stochastic_idm_dataset(&common::truth_params(), 4, 400, 0.05, 9)
        .iter()
        .map(|t| t.follower_accel())
        .collect();
    let corpus = build_corpus(&train, 60, 30, &vocab);
    let model = fit_ngram(&corpus, 4, 0.1, v).unwrap();
    let fitted_ce = pooled_cross_entropy(&model, &corpus);
    let uniform_train = pooled_cross_entropy(&NgramModel::uniform(4, v), &corpus);

    let period2: Vec<f64> = (0..20_000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let (c, h) = (60, 10);
    let f = TokenForecaster::train(std::slice::from_ref(&period2), c, h, &TokenForecasterConfig::default()).unwrap();
    let context = period2[period2.len() - c..].to_vec();
    let (_, scale) = tokenize(&context, &vocab);
    let continuation: Vec<f64> = (0..h).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let expected = detokenize(&tokenize_with_scale(&continuation, scale, &vocab).tokens, scale, &vocab).unwrap();
    let out = f.forecast(&ForecastRequest::new(context, h, 1000).with_seed(13)).unwrap();
    let min_freq = (0..h)
        .map(|j| out.samples.iter().filter(|p| p[j] == expected[j]).count() as f64 / 1000.0)
        .fold(f64::INFINITY, f64::min);

    (
        uniform_ok && fitted_ce <= uniform_train && min_freq > 0.95,
        format!(
            "uniform CE - ln|V| = {:.1e}; fitted train CE {fitted_ce:.4} <= uniform {uniform_train:.4}; period-2 min per-step match {min_freq:.3} > 0.95",
            uniform_ce - (v as f64).ln()
        ),
    )
}

/// Exhaustive depth-1 split: minimum total squared error over midpoints of
/// distinct sorted values, lowest threshold on ties.
fn brute_force_split(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let sse = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|y| (y - m).powi(2)).sum::<f64>(), m)
    };
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for w in sorted.windows(2) {
        let thr = w[0] + 0.5 * (w[1] - w[0]);
        let left: Vec<f64> = xs.iter().zip(ys).filter(|(x, _)| **x <= thr).map(|(_, y)| *y).collect();
        let right: Vec<f64> = xs.iter().zip(ys).filter(|(x, _)| **x > thr).map(|(_, y)| *y).collect();
        let ((sl, ml), (sr, mr)) = (sse(&left), sse(&right));
        if best.is_none_or(|b| sl + sr < b.0) {
            best = Some((sl + sr, thr, ml, mr));
        }
    }
    best.map(|(_, t, l, r)| (t, l, r))
}

fn gbdt() -> Outcome {
    let mut r = rng(17);
    let mut split_mismatch = 0;
    let depth1 = GbdtConfig { n_trees: 1, max_depth: 1, learning_rate: 1.0, min_leaf: 1 };
    for trial in 0..50 {
        let n = r.random_range(2..=200);
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = r.random_range(-5.0..5.0);
                if trial % 2 == 0 { (x * 4.0).round() / 4.0 } else { x }
            })
            .collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin() + r.random_range(-0.3..0.3)).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let tree = fit_tree(&rows, &ys, &depth1);
        let ok = match (brute_force_split(&xs, &ys), tree.nodes[0]) {
            (Some((t, l, rt)), Node::Split { threshold, left, right, .. }) => {
                let leaf = |i: usize| match tree.nodes[i] {
                    Node::Leaf { value } => value,
                    _ => f64::NAN,
                };
                threshold == t && (leaf(left) - l).abs() <= 1e-12 && (leaf(right) - rt).abs() <= 1e-12
            }
            (None, Node::Leaf { .. }) => true,
            _ => false,
        };
        if !ok {
            split_mismatch += 1;
        }
    }

    let mut data = ResidualDataset::default();
    for _ in 0..2000 {
        let x: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        let y = 2.0 * x[0] - x[2] + 0.1 * r.random_range(-1.0..1.0);
        data.push(x, y);
    }
    let model = fit_gbdt(&data, &GbdtConfig::default()).unwrap();
    let loss = |t: usize| {
        data.features.iter().zip(&data.labels).map(|(x, y)| (y - model.predict_with(x, t)).powi(2)).sum::<f64>() / data.len() as f64
    };
    let curve: Vec<f64> = (0..=model.trees.len()).map(loss).collect();
    let increases = curve.windows(2).filter(|w| w[1] > w[0]).count();

    let xs: Vec<f64> = (0..100).map(|_| r.random_range(-3.0..3.0)).collect();
    let step = ResidualDataset {
        features: xs.iter().map(|&x| vec![x]).collect(),
        labels: xs.iter().map(|&x| if x < 0.0 { 0.0 } else { 1.0 }).collect(),
    };
    let m = fit_gbdt(&step, &depth1).unwrap();
    let step_exact = step.features.iter().zip(&step.labels).all(|(x, y)| m.predict(x) == *y);

    (
        split_mismatch == 0 && increases == 0 && model.trees.len() == 100 && step_exact,
        format!(
            "{split_mismatch}/50 depth-1 splits differ from brute force; loss {:.4} -> {:.4} over {} rounds with {increases} increases; step fixture exact: {step_exact}",
            curve[0],
            curve[curve.len() - 1],
            model.trees.len()
        ),
    )
}

/// Returns the truth plus a constant offset.
struct Offset(f64);

impl BacktestModel for Offset {
    fn name(&self) -> &str {
        "offset"
    }

    fn forecast_window(&self, traj: &Trajectory, w: &Window, n: usize, _seed: u64) -> Result<Forecast> {
        let point = traj.samples[w.horizon.clone()].iter().map(|s| s.a_f + self.0).collect();
        Ok(Forecast::deterministic(point, n))
    }
}

fn flat_traj(id: &str, a_f: impl Iterator<Item = f64>) -> Trajectory {
    let samples = a_f
        .enumerate()
        .map(|(i, a)| Sample { t: i as f64 / 10.0, v_l: 15.0, v_f: 15.0, a_l: 0.0, a_f: a, gap: 30.0, dv: 0.0 })
        .collect();
    Trajectory { id: id.into(), hz: 10.0, samples }
}

/// Independent persistence/Holt backtest over expanding windows.
fn scripted_backtest(test: &[Trajectory], c: usize, h: usize, holt: bool) -> (Vec<f64>, f64, f64) {
    let mut sorted: Vec<&Trajectory> = test.iter().collect();
    sorted.sort_by(|a, b| trajectory::natural_cmp(&a.id, &b.id));
    let mut rmses = Vec::new();
    for t in sorted {
        let a: Vec<f64> = t.samples.iter().map(|s| s.a_f).collect();
        let mut start = c;
        while start + h <= a.len() {
            let ctx = &a[..start];
            let pred: Vec<f64> = if holt {
                HoltForecaster::default().fit(ctx).unwrap().point(h)
            } else {
                vec![ctx[ctx.len() - 1]; h]
            };
            let mse = (0..h).map(|j| (a[start + j] - pred[j]).powi(2)).sum::<f64>() / h as f64;
            rmses.push(mse.sqrt());
            start += h;
        }
    }
    let mean = rmses.iter().sum::<f64>() / rmses.len() as f64;
    let std = (rmses.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / rmses.len() as f64).sqrt();
    (rmses, mean, std)
}

fn backtest_identities() -> Outcome {
    let cfg = BacktestConfig { context_len: 60, horizon_len: 30, stride: 30, expanding: true, n_samples: 5 };
    let mut r = rng(4);
    let fixture = flat_traj("0", (0..360).map(|_| r.random_range(-8..=8) as f64 / 8.0));
    let t_count = evaluate(&Univariate(Persistence), std::slice::from_ref(&fixture), &cfg, 0).unwrap().n_windows;
    let count_ok = t_count == 10 && nominal_window_count(300, 30) == 10;

    let perfect = evaluate(&Offset(0.0), std::slice::from_ref(&fixture), &cfg, 0).unwrap();
    let offset = evaluate(&Offset(-0.25), std::slice::from_ref(&fixture), &cfg, 0).unwrap();
    let perfect_ok = perfect.mean_rmse == 0.0 && perfect.std_rmse == 0.0;
    let offset_ok = offset.mean_rmse == 0.25 && offset.std_rmse == 0.0;

    let test = common::idm_dataset(&common::truth_params(), 5, 420, 31);
    let mut worst = 0.0f64;
    for holt in [false, true] {
        let report = if holt {
            evaluate(&Univariate(HoltForecaster::default()), &test, &cfg, 9).unwrap()
        } else {
            evaluate(&Univariate(Persistence), &test, &cfg, 9).unwrap()
        };
        let (rmses, mean, std) = scripted_backtest(&test, 60, 30, holt);
        if rmses.len() != report.n_windows {
            worst = f64::INFINITY;
            continue;
        }
        for (w, x) in report.windows.iter().zip(&rmses) {
            worst = worst.max((w.rmse - x).abs());
        }
        worst = worst.max((report.mean_rmse - mean).abs()).max((report.std_rmse - std).abs());
    }
    (
        count_ok && perfect_ok && offset_ok && worst <= 1e-12,
        format!(
            "T = {t_count} on 300 scored samples with H=30; perfect mean {} std {}; offset -0.25 mean {} std {}; scripted loop max diff {worst:.1e} <= 1e-12",
            perfect.mean_rmse, perfect.std_rmse, offset.mean_rmse, offset.std_rmse
        ),
    )
}

fn ensemble_direction() -> Outcome {
    let t0 = Instant::now();
    let data = common::stochastic_idm_dataset(&common::truth_params(), 20, 600, 0.05, 41);
    let (train, test) = trajectory::split(&data, Default::default()).unwrap();
    let bt = BacktestConfig { n_samples: 20, ..BacktestConfig::default() };
    let series: Vec<Vec<f64>> = train.iter().map(|t| t.follower_accel()).collect();
    let base = TokenForecaster::train(&series, bt.context_len, bt.horizon_len, &TokenForecasterConfig::default()).unwrap();
    let plain = evaluate(&Univariate(base.clone()), &test, &bt, 1).unwrap();
    let ens = CovariateEnsemble::fit(base, &train, &bt, &GbdtConfig::default(), 1).unwrap();
    let corrected = evaluate(&ens, &test, &bt, 1).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    (
        corrected.mean_rmse <= plain.mean_rmse * 1.02 && secs < 120.0,
        format!(
            "token base mean RMSE {:.4}, with covariates {:.4} (<= base + 2%), {} test windows, {secs:.1}s < 120s",
            plain.mean_rmse, corrected.mean_rmse, plain.n_windows
        ),
    )
}

const REFERENCE_MEANS: [(&str, f64); 3] = [("v_l", 32.6), ("v_f", 32.6), ("gap", 42.7)];

fn casale(dir: &str) -> Outcome {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let mut cfg = RunConfig::default();
    cfg.data.paths = paths;
    if let Ok(spec) = std::env::var("CFBENCH_CASALE_SCHEMA") {
        for item in spec.split(',').filter_map(|s| s.split_once('=')) {
            cfg.data.schema.insert(item.0.trim().into(), item.1.trim().into());
        }
    }
    let data = pipeline::load_dataset(&cfg).unwrap();
    let s = trajectory::summarize(&data).unwrap();
    let means = [s.v_l.mean, s.v_f.mean, s.gap.mean];
    let stats_ok = REFERENCE_MEANS.iter().zip(means).all(|((_, m), x)| (x - m).abs() <= 0.5);
    let (train, test) = trajectory::split(&data, cfg.split_spec()).unwrap();
    let cal = calibrate(&train, &pipeline::calibration_config(&cfg).unwrap()).unwrap();
    let model = IdmModel { params: cal.params, convention: SignConvention::Treiber2000 };
    let rep = evaluate(&model, &test, &cfg.backtest_config(), 0).unwrap();
    let rmse_ok = (0.65..=0.95).contains(&rep.mean_rmse);
    (
        stats_ok && rmse_ok,
        format!(
            "means v_l {:.2} v_f {:.2} gap {:.2} vs 32.6/32.6/42.7 (+-0.5); IDM backtest mean RMSE {:.3} vs [0.65, 0.95] (reported, not gating)",
            means[0], means[1], means[2], rep.mean_rmse
        ),
    )
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("synthetic.csv");
    let data = common::stochastic_idm_dataset(&common::truth_params(), 6, 300, 0.05, 51);
    std::fs::write(&data_path, common::to_csv(&data)).unwrap();
    let mut cfg = RunConfig { seed: 77, output_dir: dir.path().join("out"), ..RunConfig::default() };
    cfg.data.paths = vec![data_path];
    cfg.data.split = 0.5;
    cfg.idm.budget = 1600;
    cfg.models.roster = ["idm", "persistence", "holt", "ar", "token"].map(String::from).to_vec();
    cfg.models.covariates = true;
    cfg.models.ar_order = 3;

    let run = || -> Vec<(String, Vec<u8>)> {
        let outs = pipeline::run_backtest(&cfg, &mut Artifacts::new()).unwrap();
        outs.iter().map(|o| (o.report.model.clone(), std::fs::read(&o.csv).unwrap())).collect()
    };
    let first = run();
    let second = run();
    let identical = first == second;
    (identical && first.len() == 9, format!("{} report CSVs from two runs byte-identical: {identical}", first.len()))
}

fn echo_conformance() -> Outcome {
    let ep = AdapterEndpoint::process(env!("CARGO_BIN_EXE_cfbench-echo"), &[], "echo");
    let rep = run_conformance(&ep, 100, 3).unwrap();
    (rep.ok(), format!("{}/{} requests conform (ping, 100 randomized forecasts, error path)", rep.passed, rep.requests))
}

fn main() {
    let mut suite = Suite { failures: 0 };
    suite.check("idm equilibria and monotonicity", idm_equilibria);
    suite.check("idm high-precision oracle", idm_oracle);
    suite.check("calibration recovery", calibration_recovery);
    suite.check("tokenizer round trip and scale invariance", tokenizer);
    suite.check("token pipeline losses and period-2 sampling", token_pipeline);
    suite.check("gbdt split oracle, loss monotonicity, step fixture", gbdt);
    suite.check("backtest identities", backtest_identities);
    suite.check("covariate ensemble direction", ensemble_direction);
    match std::env::var("CFBENCH_CASALE_DIR") {
        Ok(dir) => {
            let (pass, detail) = catch_unwind(AssertUnwindSafe(|| casale(&dir))).unwrap_or((false, "panicked".into()));
            println!("{}  casale data (soft): {detail}", if pass { "PASS" } else { "FAIL (soft)" });
        }
        Err(_) => println!("SKIP  casale data (soft): set CFBENCH_CASALE_DIR to a directory of Casale CSVs"),
    }
    suite.check("reproducible report CSVs", reproducibility);
    suite.check("echo endpoint protocol conformance", echo_conformance);
    if suite.failures > 0 {
        println!("{} acceptance check(s) failed", suite.failures);
        std::process::exit(1);
    }
    println!("all gating acceptance checks passed");
}
