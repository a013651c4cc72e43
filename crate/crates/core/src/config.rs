//! Run configuration.
//!
//! A TOML file with one table per concern. Every field has a default, so an
//! empty file (or no file) is a valid configuration; command-line flags are
//! applied on top. The SHA-256 of the effective configuration is embedded in
//! every artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backtest::BacktestConfig;
use crate::ensemble::GbdtConfig;
use crate::idm::SignConvention;
use crate::interop::{AdapterEndpoint, Transport};
use crate::token::TokenForecasterConfig;
use crate::trajectory::{Schema, SplitSpec, VehicleLengths};
use crate::{Error, Result};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "CFBENCH_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub paths: Vec<PathBuf>,
    /// Canonical field name to CSV column overrides.
    pub schema: BTreeMap<String, String>,
    pub split: f64,
    pub leader_length: f64,
    pub follower_length: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        let lengths = VehicleLengths::default();
        DataSection {
            paths: Vec::new(),
            schema: BTreeMap::new(),
            split: SplitSpec::default().train_fraction,
            leader_length: lengths.leader,
            follower_length: lengths.follower,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestSection {
    pub context: usize,
    pub horizon: usize,
    /// Defaults to the horizon.
    pub stride: Option<usize>,
    pub expanding: bool,
    pub n_samples: usize,
}

impl Default for BacktestSection {
    fn default() -> Self {
        let d = BacktestConfig::default();
        BacktestSection { context: d.context_len, horizon: d.horizon_len, stride: None, expanding: d.expanding, n_samples: d.n_samples }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdmSection {
    pub convention: String,
    pub budget: usize,
    pub starts: usize,
    pub calibrate_c2: bool,
    /// Use previously calibrated parameters instead of calibrating.
    pub params_file: Option<PathBuf>,
}

impl Default for IdmSection {
    fn default() -> Self {
        IdmSection {
            convention: SignConvention::default().as_str().to_string(),
            budget: 16 * 600,
            starts: 16,
            calibrate_c2: false,
            params_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenSection {
    pub n_bins: usize,
    pub clip: f64,
    pub order: usize,
    pub smoothing: f64,
}

impl Default for TokenSection {
    fn default() -> Self {
        let d = TokenForecasterConfig::default();
        TokenSection { n_bins: d.n_bins, clip: d.clip, order: d.order, smoothing: d.smoothing }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbdtSection {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for GbdtSection {
    fn default() -> Self {
        let d = GbdtConfig::default();
        GbdtSection { n_trees: d.n_trees, max_depth: d.max_depth, learning_rate: d.learning_rate, min_leaf: d.min_leaf }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsSection {
    pub roster: Vec<String>,
    /// Adds a covariate-corrected variant of every univariate model.
    pub covariates: bool,
    pub ar_order: usize,
    pub token: TokenSection,
    pub gbdt: GbdtSection,
}

impl Default for ModelsSection {
    fn default() -> Self {
        ModelsSection {
            roster: vec!["idm".into(), "persistence".into(), "holt".into()],
            covariates: false,
            ar_order: 10,
            token: TokenSection::default(),
            gbdt: GbdtSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterSection {
    pub label: String,
    pub transport: Transport,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
}

fn default_timeout() -> f64 {
    30.0
}

impl AdapterSection {
    pub fn endpoint(&self) -> Result<AdapterEndpoint> {
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(Error::Config(format!("adapter `{}` timeout must be positive", self.label)));
        }
        let ep = AdapterEndpoint {
            transport: self.transport.clone(),
            timeout: Duration::from_secs_f64(self.timeout_s),
            label: self.label.clone(),
        };
        ep.validate()?;
        Ok(ep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub data: DataSection,
    pub backtest: BacktestSection,
    pub idm: IdmSection,
    pub models: ModelsSection,
    pub adapters: Vec<AdapterSection>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            output_dir: PathBuf::from("cfbench-out"),
            data: DataSection::default(),
            backtest: BacktestSection::default(),
            idm: IdmSection::default(),
            models: ModelsSection::default(),
            adapters: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim().replace('\n', " ")))
    }

    /// Reads a config file; relative data paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            for p in &mut cfg.data.paths {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn schema(&self) -> Result<Schema> {
        Schema::with_overrides(self.data.schema.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    pub fn lengths(&self) -> VehicleLengths {
        VehicleLengths { leader: self.data.leader_length, follower: self.data.follower_length }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec { train_fraction: self.data.split }
    }

    pub fn backtest_config(&self) -> BacktestConfig {
        let b = &self.backtest;
        BacktestConfig {
            context_len: b.context,
            horizon_len: b.horizon,
            stride: b.stride.unwrap_or(b.horizon),
            expanding: b.expanding,
            n_samples: b.n_samples,
        }
    }

    pub fn convention(&self) -> Result<SignConvention> {
        self.idm.convention.parse()
    }

    pub fn token_config(&self) -> TokenForecasterConfig {
        let t = &self.models.token;
        TokenForecasterConfig { n_bins: t.n_bins, clip: t.clip, order: t.order, smoothing: t.smoothing }
    }

    pub fn gbdt_config(&self) -> GbdtConfig {
        let g = &self.models.gbdt;
        GbdtConfig { n_trees: g.n_trees, max_depth: g.max_depth, learning_rate: g.learning_rate, min_leaf: g.min_leaf }
    }

    /// Checks values and that every referenced input file exists.
    pub fn validate(&self) -> Result<()> {
        if self.data.paths.is_empty() {
            return Err(Error::Config("no dataset paths given".into()));
        }
        for p in &self.data.paths {
            if !p.is_file() {
                return Err(Error::Config(format!("dataset {} does not exist", p.display())));
            }
        }
        if let Some(p) = &self.idm.params_file {
            if !p.is_file() {
                return Err(Error::Config(format!("parameter file {} does not exist", p.display())));
            }
        }
        self.schema()?;
        self.convention()?;
        self.backtest_config().validate()?;
        self.gbdt_config().validate()?;
        for a in &self.adapters {
            a.endpoint()?;
        }
        Ok(())
    }

    /// Hex SHA-256 of the JSON rendering of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Hash of the settings that determine which windows are scored; reports
    /// sharing it are comparable.
    pub fn provenance(&self) -> String {
        let key = serde_json::json!({
            "seed": self.seed,
            "data": self.data,
            "backtest": self.backtest_config(),
        });
        hex::encode(Sha256::digest(key.to_string().as_bytes()))
    }

    /// `cfbench <version> config=<hash>`.
    pub fn header(&self) -> String {
        format!("cfbench {} config={}", crate::VERSION, self.hash())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::default().backtest_config(), BacktestConfig::default());
    }

    #[test]
    fn parses_sections() {
        let cfg = RunConfig::from_toml(
            r#"
            seed = 7
            [data]
            paths = ["a.csv"]
            schema = { v_follower = "speed_follower" }
            [backtest]
            context = 40
            horizon = 10
            [models]
            roster = ["idm", "ar"]
            covariates = true
            [[adapters]]
            label = "echo"
            transport = { kind = "process", program = "cfbench-echo" }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.backtest_config().stride, 10);
        assert_eq!(cfg.schema().unwrap().column(crate::trajectory::Field::VFollower), "speed_follower");
        assert_eq!(cfg.adapters[0].endpoint().unwrap().timeout, Duration::from_secs(30));
    }

    #[test]
    fn unknown_keys_and_hash() {
        assert!(matches!(RunConfig::from_toml("sed = 1"), Err(Error::Config(_))));
        let a = RunConfig::default();
        let b = RunConfig { seed: 1, ..RunConfig::default() };
        assert_eq!(a.hash(), RunConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn validate_requires_existing_data() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_err());
        cfg.data.paths = vec![PathBuf::from("/definitely/not/here.csv")];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
