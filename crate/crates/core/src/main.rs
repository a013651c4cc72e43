use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cfbench::config::{RunConfig, CONFIG_ENV};
use cfbench::pipeline::{self, Artifacts};
use cfbench::{Error, Result};

#[derive(Parser)]
#[command(name = "cfbench", version, about = "Car-following acceleration forecasting benchmark")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// TOML run configuration.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Dataset CSV files (replace the configured list).
    #[arg(long = "data", global = true)]
    data: Vec<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fraction of trajectories used for training.
    #[arg(long, global = true)]
    split: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Clean raw trajectories and write the canonical CSV.
    Ingest {
        /// Column overrides as `field=column,...`.
        #[arg(long)]
        schema: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print per-variable dataset statistics.
    Stats,
    /// Calibrate the IDM on the training split.
    Calibrate {
        /// treiber2000 or reversed.
        #[arg(long)]
        convention: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Backtest every model in the roster on the test split.
    Backtest {
        #[arg(long)]
        context: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        stride: Option<usize>,
        /// Use a sliding rather than expanding context.
        #[arg(long)]
        sliding: bool,
        #[arg(long)]
        n_samples: Option<usize>,
        /// Comma-separated model roster.
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
        /// Add covariate-corrected variants of the univariate models.
        #[arg(long)]
        covariates: bool,
        #[arg(long)]
        convention: Option<String>,
    },
    /// Rank backtest reports by mean RMSE.
    Compare {
        /// Report JSON files; defaults to every report in the output directory.
        reports: Vec<PathBuf>,
        #[arg(long)]
        reference: Option<String>,
    },
    /// Write the context/truth/forecast trace of one test window.
    Trace {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        window: usize,
        /// Test trajectory id (first one by default).
        #[arg(long)]
        traj: Option<String>,
        #[arg(long)]
        context: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
    },
}

fn base_config(g: &GlobalOpts) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if !g.data.is_empty() {
        cfg.data.paths = g.data.clone();
    }
    if let Some(d) = &g.out_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(f) = g.split {
        cfg.data.split = f;
    }
    Ok(cfg)
}

fn run(cli: Cli, art: &mut Artifacts) -> Result<()> {
    let mut cfg = base_config(&cli.global)?;
    match cli.command {
        Command::Ingest { schema, out } => {
            if let Some(spec) = schema {
                for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (k, v) = item
                        .split_once('=')
                        .ok_or_else(|| Error::Schema(format!("expected field=column, got `{item}`")))?;
                    cfg.data.schema.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
            let n = pipeline::run_ingest(&cfg, &out, art)?;
            println!("wrote {n} trajectories to {}", out.display());
        }
        Command::Stats => {
            let summary = pipeline::run_stats(&cfg)?;
            println!("# {}", cfg.header());
            println!("{summary}");
        }
        Command::Calibrate { convention, budget } => {
            if let Some(c) = convention {
                cfg.idm.convention = c;
            }
            if let Some(b) = budget {
                cfg.idm.budget = b;
            }
            let (cal, path) = pipeline::run_calibrate(&cfg, art)?;
            println!("train_rmse {:.6} evaluations {} params {}", cal.rmse, cal.evaluations, path.display());
        }
        Command::Backtest { context, horizon, stride, sliding, n_samples, models, covariates, convention } => {
            let b = &mut cfg.backtest;
            b.context = context.unwrap_or(b.context);
            b.horizon = horizon.unwrap_or(b.horizon);
            b.stride = stride.or(b.stride);
            b.n_samples = n_samples.unwrap_or(b.n_samples);
            b.expanding &= !sliding;
            if !models.is_empty() {
                cfg.models.roster = models;
            }
            cfg.models.covariates |= covariates;
            if let Some(c) = convention {
                cfg.idm.convention = c;
            }
            for o in pipeline::run_backtest(&cfg, art)? {
                println!(
                    "{:<16} mean_rmse {:.6} std_rmse {:.6} windows {} -> {}",
                    o.report.model,
                    o.report.mean_rmse,
                    o.report.std_rmse,
                    o.report.n_windows,
                    o.csv.display()
                );
            }
        }
        Command::Compare { reports, reference } => {
            let reports = if reports.is_empty() { pipeline::find_reports(&cfg.output_dir)? } else { reports };
            let ranking = pipeline::run_compare(&cfg, &reports, reference.as_deref(), art)?;
            print!("{ranking}");
        }
        Command::Trace { model, window, traj, context, horizon } => {
            cfg.backtest.context = context.unwrap_or(cfg.backtest.context);
            cfg.backtest.horizon = horizon.unwrap_or(cfg.backtest.horizon);
            let path = pipeline::run_trace(&cfg, &model, traj.as_deref(), window, art)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut art = Artifacts::new();
    match run(cli, &mut art) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            art.rollback();
            let msg = e.to_string().replace('\n', " ");
            eprintln!("cfbench: error[{}]: {msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}
