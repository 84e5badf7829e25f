//! Experiment configuration: one JSON document drives every command.
//!
//! Cross-field constraints (tilt radius, admissible `(β, δ)` ranges,
//! power-of-two `N`) are validated where the values are consumed; loading
//! validates shape and the constraints that do not depend on the command.

use crate::disorder::DisorderSpec;
use crate::error::{Error, Result};
use crate::pinning::RenewalLaw;
use crate::toy::ProductSpinSpec;
use crate::verify::VerifySuite;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub renewal: Option<RenewalLaw>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin: Option<ProductSpinSpec>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    /// Grid for the constants command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Rare-stretch experiment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Critical-point bisection tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Counterexample parameter and grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecutionSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Optional path for per-replica CSV rows of the free-energy command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replica_csv: Option<String>,
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub parameters: ParameterSection,
    #[serde(default)]
    pub execution: ExecutionSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<VerifySuite>,
}

impl ExperimentConfig {
    /// Parses a config document, rejecting unknown fields.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn disorder(&self) -> Result<&DisorderSpec> {
        self.model
            .disorder
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("missing field model.disorder".into()))
    }

    pub fn renewal(&self) -> Result<&RenewalLaw> {
        self.model
            .renewal
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("missing field model.renewal".into()))
    }

    pub fn spin(&self) -> Result<&ProductSpinSpec> {
        self.model
            .spin
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("missing field model.spin".into()))
    }

    pub fn require<T: Copy>(&self, value: Option<T>, field: &str) -> Result<T> {
        value.ok_or_else(|| Error::InvalidConfig(format!("missing field parameters.{field}")))
    }
}
