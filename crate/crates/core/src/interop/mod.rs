//! Newline-delimited JSON protocol for out-of-process forecasters.
//!
//! Protocol v1 carries one JSON object per line. A `ping` is answered by
//! `{"type":"pong","proto":1}`; a `forecast` request (id, context, horizon,
//! n_samples and optional covariates/params) is answered by a
//! `forecast_result` with an `n_samples x horizon` sample array or by an
//! `error` object with a code and message. Unknown fields are ignored and
//! non-finite numbers are never sent.
//!
//! The client side spawns a child process (or connects over TCP), keeps one
//! request in flight per connection and retries once on timeout, so every
//! call resolves within twice the configured timeout. A persistence echo
//! server is included as a reference peer.

mod client;
mod protocol;
mod server;

pub use client::{health_check, AdapterEndpoint, Connection, HealthStatus, RemoteForecaster, Transport, UnhealthyReason};
pub use protocol::{decode, encode, Message, WireCovariates, WireError, WireRequest, WireResult, PROTOCOL_VERSION};
pub use server::{serve, serve_echo, serve_tcp, EchoMode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forecast::ForecastRequest;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConformanceReport {
    pub requests: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl ConformanceReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.passed == self.requests
    }
}

/// Pings the endpoint, sends `n` randomized forecast requests checking each
/// reply against the forecast contract, then checks that an invalid request
/// is answered with an error object.
pub fn run_conformance(ep: &AdapterEndpoint, n: usize, seed: u64) -> Result<ConformanceReport> {
    let mut conn = Connection::open(ep)?;
    if let HealthStatus::Unhealthy { detail, .. } = conn.ping() {
        return Err(Error::Unavailable(format!("endpoint failed ping: {detail}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConformanceReport { requests: n + 1, passed: 0, failures: Vec::new() };
    for i in 0..n {
        let len = rng.random_range(1..=200);
        let scale = 10f64.powi(rng.random_range(-3..=3));
        let context: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0) * scale).collect();
        let req = ForecastRequest::new(context, rng.random_range(1..=64), rng.random_range(1..=32)).with_seed(rng.random());
        match conn.forecast(&req).and_then(|f| f.validate(req.horizon, req.n_samples)) {
            Ok(()) => report.passed += 1,
            Err(e) => report.failures.push(format!("request {i}: {e}")),
        }
    }
    let invalid = WireRequest { id: 0, context: vec![1.0], horizon: 0, n_samples: 1, covariates: None, params: None };
    match conn.request(invalid) {
        Ok(Message::Error(_)) => report.passed += 1,
        Ok(other) => report.failures.push(format!("invalid request answered with {other:?}")),
        Err(e) => report.failures.push(format!("invalid request: {e}")),
    }
    Ok(report)
}
