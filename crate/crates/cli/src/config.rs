//! Declarative experiment configuration: a JSON document validated into a
//! fully-defaulted [`ExperimentConfig`] that serializes back verbatim.

use serde::{Deserialize, Serialize};

use vsamem_core::codebook::Family;
use vsamem_core::engine::Nonlinearity;
use vsamem_core::operator::OperatorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Theory,
    Sweep,
    Optimize,
    Mmse,
    Ngram,
    Compare,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub n: usize,
    pub d: usize,
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default = "default_operator")]
    pub operator: String,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "default_nonlinearity")]
    pub nonlinearity: String,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub sigma_eta2: f64,
    #[serde(default = "one")]
    pub p_s: f64,
    #[serde(default)]
    pub sparseness: f64,
}

fn default_family() -> String {
    "hdc".into()
}
fn default_operator() -> String {
    "permutation".into()
}
fn default_nonlinearity() -> String {
    "linear".into()
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    /// "symbolic" or "analog".
    #[serde(default = "default_task_kind")]
    pub kind: String,
    /// Sequence length for reset memories.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Buffer mode: burn-in steps before sampling (0 = reset memory).
    #[serde(default)]
    pub burn_in: usize,
    /// Buffer mode: sampled steps after burn-in.
    #[serde(default)]
    pub window: usize,
    /// Lookbacks to score (buffer mode); empty means all reset positions.
    #[serde(default)]
    pub k_set: Vec<usize>,
    #[serde(default = "one")]
    pub input_variance: f64,
}

fn default_task_kind() -> String {
    "symbolic".into()
}
fn default_m() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSection {
    /// "naive", "mmse-empirical" or "mmse-direct".
    #[serde(default = "default_readout")]
    pub kind: String,
    #[serde(default = "default_sequences")]
    pub sequences: usize,
    /// Ridge for the covariance solve; negative means the automatic rule.
    #[serde(default = "neg_one")]
    pub ridge: f64,
    /// Detection threshold; absent disables detection.
    #[serde(default)]
    pub theta: Option<f64>,
}

fn default_readout() -> String {
    "naive".into()
}
fn default_sequences() -> usize {
    2000
}
fn neg_one() -> f64 {
    -1.0
}

impl Default for ReadoutSection {
    fn default() -> Self {
        ReadoutSection {
            kind: default_readout(),
            sequences: default_sequences(),
            ridge: neg_one(),
            theta: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Parameter to sweep: "m" | "lambda" | "kappa" | "tau" | "theta".
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    /// "total-info" | "usable-info" | "usable-horizon" | "storage-ratio".
    pub objective: String,
    /// "m" | "lambda" | "kappa" | "tau".
    pub parameter: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "one")]
    pub r_star: f64,
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NgramSection {
    pub text_file: String,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub network: NetworkSection,
    #[serde(default = "default_task")]
    pub task: TaskSection,
    #[serde(default)]
    pub readout: ReadoutSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub optimize: Option<OptimizeSection>,
    #[serde(default)]
    pub ngram: Option<NgramSection>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_task() -> TaskSection {
    TaskSection {
        kind: default_task_kind(),
        m: default_m(),
        burn_in: 0,
        window: 0,
        k_set: Vec::new(),
        input_variance: 1.0,
    }
}

fn default_trials() -> u64 {
    10_000
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("missing file: {0}")]
    MissingFile(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn family(&self) -> Result<Family, ConfigError> {
        Family::parse(&self.network.family)
            .map_err(|e| invalid("network.family", e.to_string()))
    }

    pub fn operator_kind(&self) -> Result<OperatorKind, ConfigError> {
        OperatorKind::parse(&self.network.operator)
            .map_err(|e| invalid("network.operator", e.to_string()))
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, ConfigError> {
        match self.network.nonlinearity.as_str() {
            "linear" => Ok(Nonlinearity::Linear),
            "clipped" => Ok(Nonlinearity::Clipped { kappa: self.network.kappa }),
            "tanh" => Ok(Nonlinearity::Tanh { gamma: self.network.gamma }),
            other => Err(invalid("network.nonlinearity", format!("unknown kind `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let net = &self.network;
        if net.n < 2 {
            return Err(invalid("network.n", "must be >= 2"));
        }
        if net.d < 1 {
            return Err(invalid("network.d", "must be >= 1"));
        }
        if !(net.lambda > 0.0 && net.lambda <= 1.0) {
            return Err(invalid("network.lambda", format!("must be in (0,1], got {}", net.lambda)));
        }
        if !(net.p_s > 0.0 && net.p_s <= 1.0) {
            return Err(invalid("network.p_s", "must be in (0,1]"));
        }
        if net.sigma_eta2 < 0.0 {
            return Err(invalid("network.sigma_eta2", "must be >= 0"));
        }
        if !(0.0..1.0).contains(&net.sparseness) {
            return Err(invalid("network.sparseness", "must be in [0,1)"));
        }
        self.family()?;
        self.operator_kind()?;
        let f = self.nonlinearity()?;
        f.validate()
            .map_err(|e| invalid("network.nonlinearity", e.to_string()))?;
        match self.task.kind.as_str() {
            "symbolic" | "analog" => {}
            other => return Err(invalid("task.kind", format!("unknown kind `{other}`"))),
        }
        if self.trials < 1 && self.kind == ExperimentKind::Simulate {
            // zero-trial dry runs are allowed; anything else needs samples
        }
        match self.readout.kind.as_str() {
            "naive" | "mmse-empirical" | "mmse-direct" => {}
            other => return Err(invalid("readout.kind", format!("unknown kind `{other}`"))),
        }
        if self.kind == ExperimentKind::Ngram {
            let section = self
                .ngram
                .as_ref()
                .ok_or_else(|| invalid("ngram", "ngram experiments need an `ngram` section"))?;
            if !std::path::Path::new(&section.text_file).exists() {
                return Err(ConfigError::MissingFile(section.text_file.clone()));
            }
        }
        if self.kind == ExperimentKind::Sweep && self.sweep.is_none() {
            return Err(invalid("sweep", "sweep experiments need a `sweep` section"));
        }
        if self.kind == ExperimentKind::Optimize && self.optimize.is_none() {
            return Err(invalid("optimize", "optimize experiments need an `optimize` section"));
        }
        Ok(())
    }
}
