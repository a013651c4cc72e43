//! Car-following acceleration forecasting benchmark.
//!
//! The crate covers the full pipeline used to compare car-following models
//! against time series forecasters on leader/follower trajectory data:
//!
//! - [`trajectory`]: CSV ingestion, kinematic derivation, cleaning, summary
//!   statistics and the trajectory-level train/test split.
//! - [`idm`]: the Intelligent Driver Model, follower simulation and bounded
//!   multi-start calibration.
//! - [`forecast`]: the probabilistic forecaster contract plus persistence,
//!   Holt and autoregressive baselines.
//! - [`token`]: mean scaling, uniform quantization and an n-gram categorical
//!   sequence model with autoregressive sampling.
//! - [`ensemble`]: covariate forecasting and gradient-boosted residual
//!   correction.
//! - [`backtest`]: multi-window backtesting, RMSE metrics and model ranking.
//! - [`interop`]: newline-delimited JSON protocol for out-of-process
//!   forecasters.
//! - [`config`] and [`pipeline`]: run configuration and the orchestration
//!   behind the `cfbench` binary.

pub mod backtest;
pub mod config;
pub mod ensemble;
mod error;
pub mod forecast;
pub mod idm;
pub mod interop;
pub mod optim;
pub mod pipeline;
pub mod stats;
pub mod token;
pub mod trajectory;

pub use error::{Error, Result};

/// Tool version embedded in every artifact header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
