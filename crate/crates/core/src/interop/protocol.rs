use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const PROTOCOL_VERSION: u32 = 1;

/// Longest raw payload quoted in protocol errors.
const EXCERPT_LEN: usize = 160;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireCovariates {
    pub space_gap: Vec<f64>,
    pub speed_diff: Vec<f64>,
    pub speed_fav: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub id: u64,
    pub context: Vec<f64>,
    pub horizon: usize,
    pub n_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariates: Option<WireCovariates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Map<String, serde_json::Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireResult {
    pub id: u64,
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireError {
    #[serde(default)]
    pub id: Option<u64>,
    pub code: String,
    pub message: String,
}

/// One protocol line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    Ping,
    Pong { proto: u32 },
    Forecast(WireRequest),
    ForecastResult(WireResult),
    Error(WireError),
}

impl Message {
    fn numbers(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            Message::Forecast(r) => {
                let cov = r.covariates.iter().flat_map(|c| c.space_gap.iter().chain(&c.speed_diff).chain(&c.speed_fav));
                Box::new(r.context.iter().chain(cov).copied())
            }
            Message::ForecastResult(r) => Box::new(r.samples.iter().flatten().copied()),
            _ => Box::new(std::iter::empty()),
        }
    }
}

pub fn excerpt(raw: &str) -> String {
    let raw = raw.trim_end();
    match raw.char_indices().nth(EXCERPT_LEN) {
        Some((i, _)) => format!("{}...", &raw[..i]),
        None => raw.to_string(),
    }
}

/// Serializes one message as a single JSON line (without the newline).
/// Non-finite numbers cannot travel on the wire.
pub fn encode(msg: &Message) -> Result<String> {
    if msg.numbers().any(|x| !x.is_finite()) {
        return Err(Error::Protocol("refusing to encode a non-finite number".into()));
    }
    Ok(serde_json::to_string(msg)?)
}

pub fn decode(line: &str) -> Result<Message> {
    serde_json::from_str(line.trim()).map_err(|e| Error::Protocol(format!("{e}: `{}`", excerpt(line))))
}
