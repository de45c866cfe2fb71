//! Experiment configuration: one JSON document with a section per subcommand.
//!
//! Every field has a default, so the binary runs without a config file; a
//! supplied file must parse exactly (unknown fields are rejected) and pass
//! validation before any experiment starts.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub tensor_audit: TensorAuditConfig,
    pub cfc_roundtrip: CfcRoundtripConfig,
    pub ktheory_roundtrip: KTheoryRoundtripConfig,
    pub inverse_decay: InverseDecayConfig,
    pub toeplitz_index: ToeplitzIndexConfig,
    pub quantize_converge: QuantizeConvergeConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            tensor_audit: TensorAuditConfig::default(),
            cfc_roundtrip: CfcRoundtripConfig::default(),
            ktheory_roundtrip: KTheoryRoundtripConfig::default(),
            inverse_decay: InverseDecayConfig::default(),
            toeplitz_index: ToeplitzIndexConfig::default(),
            quantize_converge: QuantizeConvergeConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TensorAuditConfig {
    pub pairs: usize,
    pub min_dim: usize,
    pub max_dim: usize,
}

impl Default for TensorAuditConfig {
    fn default() -> Self {
        Self {
            pairs: 200,
            min_dim: 2,
            max_dim: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CfcRoundtripConfig {
    pub cases: usize,
    pub min_dim: usize,
    pub max_dim: usize,
}

impl Default for CfcRoundtripConfig {
    fn default() -> Self {
        Self {
            cases: 100,
            min_dim: 2,
            max_dim: 32,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KTheoryRoundtripConfig {
    pub classes_per_algebra: usize,
    /// Block sizes of each algebra to test.
    pub algebras: Vec<Vec<usize>>,
    /// Largest matrix amplification for the random projections.
    pub max_amplification: usize,
}

impl Default for KTheoryRoundtripConfig {
    fn default() -> Self {
        Self {
            classes_per_algebra: 50,
            algebras: vec![vec![1], vec![1, 1], vec![2], vec![1, 2]],
            max_amplification: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InverseDecayConfig {
    /// Half dimension of the doubled ambient space of the homomorphism.
    pub half_dim: usize,
    /// "zero" or "random".
    pub generator: String,
    pub t_grid: Vec<f64>,
}

impl Default for InverseDecayConfig {
    fn default() -> Self {
        Self {
            half_dim: 4,
            generator: "random".into(),
            t_grid: vec![1.0, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToeplitzIndexConfig {
    pub n_modes: usize,
    /// Monomial symbols `exp(i k theta)` for each listed `k`.
    pub windings: Vec<i64>,
    /// Also run the two modulated winding-two symbols.
    pub include_modulated: bool,
}

impl Default for ToeplitzIndexConfig {
    fn default() -> Self {
        Self {
            n_modes: 64,
            windings: vec![-3, -2, -1, 0, 1, 2, 3],
            include_modulated: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantizeConvergeConfig {
    pub n_modes: usize,
    pub theta_count: usize,
    pub t_grid: Vec<f64>,
    pub tail_tol: f64,
    /// Bound the terminal error must stay below.
    pub terminal_threshold: f64,
    /// Bound the fitted decay exponent must stay below.
    pub exponent_threshold: f64,
}

impl Default for QuantizeConvergeConfig {
    fn default() -> Self {
        Self {
            n_modes: 128,
            theta_count: 512,
            t_grid: vec![4.0, 8.0, 16.0, 32.0],
            tail_tol: 1e-3,
            terminal_threshold: 5e-2,
            exponent_threshold: -0.8,
        }
    }
}

fn grid_ok(grid: &[f64]) -> bool {
    !grid.is_empty()
        && grid.iter().all(|t| t.is_finite() && *t > 0.0)
        && grid.windows(2).all(|w| w[1] > w[0])
}

impl ExperimentConfig {
    /// Structural validation; every failure is a configuration error.
    pub fn validate(&self) -> Result<(), String> {
        let ta = &self.tensor_audit;
        if ta.pairs == 0 || ta.min_dim < 2 || ta.max_dim < ta.min_dim {
            return Err("tensor_audit: need pairs >= 1 and 2 <= min_dim <= max_dim".into());
        }
        let cfc = &self.cfc_roundtrip;
        if cfc.cases == 0 || cfc.min_dim < 2 || cfc.max_dim < cfc.min_dim {
            return Err("cfc_roundtrip: need cases >= 1 and 2 <= min_dim <= max_dim".into());
        }
        let kt = &self.ktheory_roundtrip;
        if kt.classes_per_algebra == 0
            || kt.max_amplification == 0
            || kt.algebras.is_empty()
            || kt.algebras.iter().any(|b| b.is_empty() || b.iter().any(|&m| m == 0))
        {
            return Err("ktheory_roundtrip: algebras must be nonempty block lists".into());
        }
        let inv = &self.inverse_decay;
        if inv.half_dim == 0 || !grid_ok(&inv.t_grid) {
            return Err("inverse_decay: need half_dim >= 1 and an increasing positive t_grid".into());
        }
        if !matches!(inv.generator.as_str(), "zero" | "random") {
            return Err(format!(
                "inverse_decay: unknown generator '{}' (expected 'zero' or 'random')",
                inv.generator
            ));
        }
        let tp = &self.toeplitz_index;
        if tp.n_modes == 0 || tp.windings.is_empty() {
            return Err("toeplitz_index: need n_modes >= 1 and at least one winding".into());
        }
        let qc = &self.quantize_converge;
        if qc.n_modes == 0
            || qc.theta_count < 4 * qc.n_modes
            || !grid_ok(&qc.t_grid)
            || !(qc.tail_tol > 0.0)
            || !(qc.terminal_threshold > 0.0)
        {
            return Err(
                "quantize_converge: need theta_count >= 4 n_modes, increasing positive t_grid, positive tolerances"
                    .into(),
            );
        }
        Ok(())
    }
}
