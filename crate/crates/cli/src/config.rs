//! TOML run configuration.
//!
//! ```toml
//! [system]
//! users = 10          # n
//! files = 20          # m
//! cache_size = 2.0    # M, in files
//! packets = 100       # B
//! seed = 1
//!
//! [popularity]
//! alpha = 0.6                       # Zipf exponent, or
//! # probs = [0.7, 0.21, 0.09]       # explicit request probabilities
//!
//! [policy]
//! kind = "random_lfu"   # auto | rap | random_lfu | lfu | uniform | naive
//! m_tilde = "auto"      # random_lfu only: "auto" or an integer
//! budget = 400000       # rap only: objective evaluations
//!
//! [simulation]
//! trials = 200
//! placement = "fresh"   # fresh | fixed
//! coloring = "degree"   # degree | dsatur | restarts
//! restarts = 16
//! verify_decode = true
//! payload_len = 32
//! max_vertices = 2000000
//!
//! [sweep]
//! axis = "M"            # M | n | m | alpha | B
//! values = [0, 1, 2, 4]
//!
//! [output]
//! name = "run"
//! dump_first_trial = false
//! ```
//!
//! Unknown keys are rejected. `kind = "auto"` selects RAP for libraries of at
//! most [`AUTO_RAP_MAX_FILES`] files and Random LFU with searched support
//! otherwise.

use std::path::Path;

use coded_caching_core::analysis::DEFAULT_RAP_BUDGET;
use coded_caching_core::delivery::OrderPolicy;
use coded_caching_core::model::SystemParams;
use coded_caching_core::sim::{
    ExperimentSpec, MTilde, PlacementMode, Policy, Popularity, SweepAxis, DEFAULT_MAX_VERTICES,
    DEFAULT_PAYLOAD_LEN, DEFAULT_TRIALS,
};
use serde::Deserialize;

use crate::error::CliError;

/// Largest library for which `kind = "auto"` optimizes the full distribution.
pub const AUTO_RAP_MAX_FILES: usize = 10;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    #[serde(default)]
    pub popularity: PopularitySection,
    #[serde(default)]
    pub policy: PolicySection,
    #[serde(default)]
    pub simulation: SimulationSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub users: usize,
    pub files: usize,
    pub cache_size: f64,
    #[serde(default = "default_packets")]
    pub packets: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_packets() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct PopularitySection {
    pub alpha: Option<f64>,
    pub probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default)]
    pub m_tilde: MTildeValue,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

impl Default for PolicySection {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            m_tilde: MTildeValue::default(),
            budget: default_budget(),
        }
    }
}

fn default_kind() -> String {
    "auto".into()
}

fn default_budget() -> usize {
    DEFAULT_RAP_BUDGET
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MTildeValue {
    Fixed(usize),
    Named(String),
}

impl Default for MTildeValue {
    fn default() -> Self {
        MTildeValue::Named("auto".into())
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub trials: usize,
    pub placement: String,
    pub coloring: String,
    pub restarts: u32,
    pub verify_decode: bool,
    pub payload_len: usize,
    pub max_vertices: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            placement: "fresh".into(),
            coloring: "degree".into(),
            restarts: 16,
            verify_decode: true,
            payload_len: DEFAULT_PAYLOAD_LEN,
            max_vertices: DEFAULT_MAX_VERTICES,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub name: String,
    pub dump_first_trial: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            name: "run".into(),
            dump_first_trial: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub seeds: u64,
    pub rho_samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            seeds: 20,
            rho_samples: 200_000,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// A validated configuration ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub template: ExperimentSpec,
    /// `None` runs the template as a single point.
    pub sweep: Option<(SweepAxis, Vec<f64>)>,
    pub name: String,
    pub dump_first_trial: bool,
    pub verify: VerifySection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks the schema and builds the experiment template.
    pub fn plan(&self) -> Result<Plan, CliError> {
        let sys = &self.system;
        let params = SystemParams::new(sys.users, sys.files, sys.cache_size, sys.packets, sys.seed)
            .map_err(|e| config_err(format!("[system]: {e}")))?;
        let popularity = match (&self.popularity.alpha, &self.popularity.probs) {
            (Some(_), Some(_)) => {
                return Err(config_err(
                    "[popularity]: give either alpha or probs, not both",
                ))
            }
            (Some(alpha), None) => Popularity::Zipf { alpha: *alpha },
            (None, Some(probs)) => Popularity::Explicit(probs.clone()),
            (None, None) => return Err(config_err("[popularity]: alpha or probs is required")),
        };
        let policy = self.policy_for(sys.files)?;
        let sim = &self.simulation;
        let placement = match sim.placement.as_str() {
            "fresh" => PlacementMode::FreshPerTrial,
            "fixed" => PlacementMode::Fixed,
            other => {
                return Err(config_err(format!(
                    "[simulation].placement: unknown mode {other:?}"
                )))
            }
        };
        let coloring = match sim.coloring.as_str() {
            "degree" => OrderPolicy::DegreeDescending,
            "dsatur" => OrderPolicy::Dsatur,
            "restarts" => OrderPolicy::RandomRestarts {
                restarts: sim.restarts,
                seed: sys.seed,
            },
            other => {
                return Err(config_err(format!(
                    "[simulation].coloring: unknown policy {other:?}"
                )))
            }
        };
        let mut template = ExperimentSpec::new(params, popularity, policy);
        template.trials = sim.trials;
        template.placement = placement;
        template.coloring = coloring;
        template.verify_decode = sim.verify_decode;
        template.payload_len = sim.payload_len;
        template.max_vertices = sim.max_vertices;
        template
            .validate()
            .map_err(|e| config_err(format!("[simulation]: {e}")))?;
        template
            .popularity
            .build(sys.files)
            .map_err(|e| config_err(format!("[popularity]: {e}")))?;
        let sweep = match &self.sweep {
            None => None,
            Some(s) => {
                let axis = SweepAxis::parse(&s.axis).ok_or_else(|| {
                    config_err(format!("[sweep].axis: unknown axis {:?}", s.axis))
                })?;
                for &v in &s.values {
                    coded_caching_core::sim::apply_axis(&template, axis, v)
                        .map_err(|e| config_err(format!("[sweep]: {e}")))?;
                }
                Some((axis, s.values.clone()))
            }
        };
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return Err(config_err("[output].name must be a plain file stem"));
        }
        Ok(Plan {
            template,
            sweep,
            name: self.output.name.clone(),
            dump_first_trial: self.output.dump_first_trial,
            verify: self.verify.clone(),
        })
    }

    fn policy_for(&self, files: usize) -> Result<Policy, CliError> {
        let p = &self.policy;
        let m_tilde = match &p.m_tilde {
            MTildeValue::Fixed(v) => MTilde::Fixed(*v),
            MTildeValue::Named(s) if s == "auto" => MTilde::Auto,
            MTildeValue::Named(s) => {
                return Err(config_err(format!(
                    "[policy].m_tilde: expected \"auto\" or an integer, got {s:?}"
                )))
            }
        };
        Ok(match p.kind.as_str() {
            "auto" if files <= AUTO_RAP_MAX_FILES => Policy::Rap { budget: p.budget },
            "auto" => Policy::RandomLfu(MTilde::Auto),
            "rap" => Policy::Rap { budget: p.budget },
            "random_lfu" => Policy::RandomLfu(m_tilde),
            "lfu" => Policy::Lfu,
            "uniform" => Policy::Uniform,
            "naive" => Policy::NaiveMulticast,
            other => {
                return Err(config_err(format!(
                    "[policy].kind: unknown policy {other:?}"
                )))
            }
        })
    }
}
