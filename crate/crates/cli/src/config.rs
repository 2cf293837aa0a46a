//! Experiment configurations. A config plus the artifact version fully
//! determines the run output; all of them serialize to TOML with
//! stable field names and load back unchanged.

use serde::{Deserialize, Serialize};

fn default_z_max() -> f64 {
    4.0
}
fn default_p_min() -> f64 {
    0.01
}
fn default_n_large() -> usize {
    100_000
}
fn default_prefix() -> usize {
    3
}
fn default_one() -> f64 {
    1.0
}
fn default_exponent() -> f64 {
    0.25
}

/// Graph selection shared by the sampling/simulation subcommands.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GraphChoice {
    /// Lattice dimension (box graphs).
    #[serde(default)]
    pub dimension: Option<usize>,
    /// Full side length, odd (box graphs).
    #[serde(default)]
    pub side: Option<usize>,
    #[serde(default, rename = "W")]
    pub w: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub wired: bool,
    /// Path to a TOML graph description; overrides the box fields.
    #[serde(default)]
    pub graph_file: Option<String>,
}

impl GraphChoice {
    pub fn resolve(&self) -> anyhow::Result<vrjp_core::WeightedGraph> {
        if let Some(path) = &self.graph_file {
            let text = std::fs::read_to_string(path)?;
            return Ok(vrjp_core::WeightedGraph::from_toml(&text)?);
        }
        let d = self.dimension.unwrap_or(1);
        let side = self.side.unwrap_or(3);
        if side % 2 == 0 || side < 3 {
            anyhow::bail!("side must be odd and >= 3, got {side}");
        }
        let spec = vrjp_core::BoxSpec::new(d, (side - 1) / 2);
        let w = self.w.unwrap_or(1.0);
        let theta = self.theta.unwrap_or(1.0);
        let g = vrjp_core::build_box(&spec, w, theta)?;
        Ok(if self.wired {
            vrjp_core::wire_box(&g, theta)?
        } else {
            g
        })
    }
}

impl Default for GraphChoice {
    fn default() -> Self {
        GraphChoice {
            dimension: Some(1),
            side: Some(3),
            w: Some(1.0),
            theta: Some(1.0),
            wired: false,
            graph_file: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SamplePotentialConfig {
    pub seed: u64,
    #[serde(default)]
    pub graph: GraphChoice,
    #[serde(default = "crate::config::one_usize")]
    pub samples: usize,
}

pub(crate) fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WardCheckConfig {
    pub seed: u64,
    #[serde(default = "default_n_large")]
    pub n_samples: usize,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GreenCheckConfig {
    pub seed: u64,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default = "default_expansion_tol")]
    pub tolerance: f64,
}

fn default_max_len() -> usize {
    200
}
fn default_expansion_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Vrjp,
    Errw,
    Quenched,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SimulateConfig {
    pub seed: u64,
    pub process: ProcessKind,
    #[serde(default)]
    pub graph: GraphChoice,
    /// Start vertex; defaults to the box center (or 0).
    #[serde(default)]
    pub start: Option<usize>,
    /// Number of jumps (or discrete steps).
    #[serde(default = "default_jumps")]
    pub jumps: usize,
    /// Stop at this horizon instead of a jump count (reinforced walker only).
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Report the time-changed clock instead of the original one
    /// (reinforced walker only).
    #[serde(default)]
    pub time_changed: bool,
}

fn default_jumps() -> usize {
    20
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MixtureTestConfig {
    pub seed: u64,
    #[serde(default = "default_n_large")]
    pub n_samples: usize,
    #[serde(default = "default_prefix")]
    pub prefix_len: usize,
    #[serde(default = "default_p_min")]
    pub p_min: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ErrwEquivalenceConfig {
    pub seed: u64,
    #[serde(default = "default_n_large")]
    pub n_samples: usize,
    #[serde(default = "default_prefix")]
    pub prefix_len: usize,
    #[serde(default = "default_p_min")]
    pub p_min: f64,
    /// Initial edge weight (Gamma shape on the mixture side).
    #[serde(default = "default_one")]
    pub a: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FractionalDecayConfig {
    pub seed: u64,
    #[serde(default = "default_dim")]
    pub dimension: usize,
    #[serde(default = "default_side_41")]
    pub side: usize,
    /// Deterministic edge weight; ignored when `gamma_shape` is set.
    #[serde(default = "default_small_w", rename = "W")]
    pub w: f64,
    /// Draw i.i.d. Gamma(shape, 1) edge weights instead.
    #[serde(default)]
    pub gamma_shape: Option<f64>,
    #[serde(default = "default_one")]
    pub theta: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    #[serde(default = "default_n_decay")]
    pub n_samples: usize,
    /// Largest axis offset probed; defaults to the box radius.
    #[serde(default)]
    pub max_offset: Option<usize>,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
}

fn default_dim() -> usize {
    1
}
fn default_side_41() -> usize {
    41
}
fn default_small_w() -> f64 {
    0.01
}
fn default_n_decay() -> usize {
    5000
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ThresholdsConfig {
    #[serde(default = "default_dims")]
    pub dimensions: Vec<usize>,
    #[serde(default = "default_one")]
    pub theta: f64,
}

fn default_dims() -> Vec<usize> {
    vec![1, 2, 3]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LocalizationConfig {
    pub seed: u64,
    #[serde(default = "default_sites")]
    pub sites: usize,
    #[serde(default = "default_thetas_contrast")]
    pub thetas: Vec<f64>,
    #[serde(default = "default_loc_samples")]
    pub samples: usize,
    #[serde(default = "default_one", rename = "W")]
    pub w: f64,
    #[serde(default = "default_resid_tol")]
    pub residual_tol: f64,
}

fn default_sites() -> usize {
    100
}
fn default_thetas_contrast() -> Vec<f64> {
    vec![0.1, 10.0]
}
fn default_loc_samples() -> usize {
    200
}
fn default_resid_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EtaDecayConfig {
    pub seed: u64,
    #[serde(default = "default_eta_sides")]
    pub sides: Vec<usize>,
    #[serde(default = "default_eta_theta")]
    pub theta: f64,
    #[serde(default = "default_one", rename = "W")]
    pub w: f64,
    #[serde(default = "default_eta_samples")]
    pub n_samples: usize,
}

fn default_eta_sides() -> Vec<usize> {
    vec![5, 9, 13, 17, 21]
}
fn default_eta_theta() -> f64 {
    0.25
}
fn default_eta_samples() -> usize {
    400
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TauCheckConfig {
    #[serde(default = "default_tau_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default = "default_tau_d0s")]
    pub d0s: Vec<f64>,
    #[serde(default = "default_tau_slope")]
    pub expected_slope: f64,
    #[serde(default = "default_tau_tol")]
    pub tolerance: f64,
}

fn default_tau_thetas() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}
fn default_tau_d0s() -> Vec<f64> {
    vec![0.0, 3.0]
}
fn default_tau_slope() -> f64 {
    0.5
}
fn default_tau_tol() -> f64 {
    0.02
}

/// The full experiment description; `command` selects the subcommand.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    SamplePotential(SamplePotentialConfig),
    WardCheck(WardCheckConfig),
    GreenCheck(GreenCheckConfig),
    Simulate(SimulateConfig),
    MixtureTest(MixtureTestConfig),
    ErrwEquivalence(ErrwEquivalenceConfig),
    FractionalDecay(FractionalDecayConfig),
    Thresholds(ThresholdsConfig),
    Localization(LocalizationConfig),
    EtaDecay(EtaDecayConfig),
    TauCheck(TauCheckConfig),
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Override the master seed where the experiment has one.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::SamplePotential(c) => c.seed = seed,
            ExperimentConfig::WardCheck(c) => c.seed = seed,
            ExperimentConfig::GreenCheck(c) => c.seed = seed,
            ExperimentConfig::Simulate(c) => c.seed = seed,
            ExperimentConfig::MixtureTest(c) => c.seed = seed,
            ExperimentConfig::ErrwEquivalence(c) => c.seed = seed,
            ExperimentConfig::FractionalDecay(c) => c.seed = seed,
            ExperimentConfig::Localization(c) => c.seed = seed,
            ExperimentConfig::EtaDecay(c) => c.seed = seed,
            ExperimentConfig::Thresholds(_) | ExperimentConfig::TauCheck(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig::FractionalDecay(FractionalDecayConfig {
            seed: 42,
            dimension: 2,
            side: 11,
            w: 0.05,
            gamma_shape: None,
            theta: 1.0,
            exponent: 0.25,
            n_samples: 2000,
            max_offset: Some(5),
            z_max: 4.0,
        });
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn graph_choice_builds_wired_box() {
        let gc = GraphChoice {
            dimension: Some(2),
            side: Some(3),
            w: Some(0.5),
            theta: Some(1.0),
            wired: true,
            graph_file: None,
        };
        let g = gc.resolve().unwrap();
        assert_eq!(g.vertex_count(), 10);
        assert!(g.delta().is_some());
    }

    #[test]
    fn graph_choice_rejects_even_side() {
        let gc = GraphChoice {
            side: Some(4),
            ..GraphChoice::default()
        };
        assert!(gc.resolve().is_err());
    }
}
