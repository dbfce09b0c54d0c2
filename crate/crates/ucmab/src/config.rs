//! TOML experiment configuration: one file fully determines a run.
//! See `docs/schemas.md` for the documented schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandits::BanditConfig;
use crate::core::{compute_threshold_checked, RewardSpec};
use crate::hillstrom::{ResponseField, TreatmentArm};
use crate::simenv::{DriftSchedule, Environment, EnvironmentSpec, SurfaceParams};
use crate::uplift_baseline::{ControllerConfig, ForestParams, TreeParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid reward spec: {0}")]
    Reward(#[from] crate::core::CoreError),
    #[error("invalid environment: {0}")]
    Env(#[from] crate::simenv::EnvError),
    #[error("invalid agent config: {0}")]
    Agent(#[from] crate::bandits::BanditError),
    #[error("invalid controller config: {0}")]
    Controller(#[from] crate::uplift_baseline::BaselineError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Qini,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardConfig {
    pub response: f64,
    /// `(psi_0, psi_1)`.
    pub psi: (f64, f64),
}

impl RewardConfig {
    pub fn to_spec(&self) -> RewardSpec {
        RewardSpec {
            reward_on_response: self.response,
            reward_on_no_response: 0.0,
            penalties: self.psi,
        }
    }
}

fn default_window() -> usize {
    500
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftConfig {
    pub kind: String,
    pub t_change: Option<u64>,
    pub t_begin: Option<u64>,
    pub t_end: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvConfig {
    pub dim: usize,
    pub horizon: u64,
    #[serde(default = "default_window")]
    pub window: usize,
    pub surface_start: SurfaceParams,
    pub surface_end: Option<SurfaceParams>,
    pub drift: Option<DriftConfig>,
}

impl EnvConfig {
    pub fn schedule(&self) -> Result<DriftSchedule, ConfigError> {
        let kind = self.drift.as_ref().map(|d| d.kind.as_str()).unwrap_or("none");
        match kind {
            "none" => Ok(DriftSchedule::None {
                theta: self.surface_start.clone(),
            }),
            "sudden" => {
                let drift = self.drift.as_ref().unwrap();
                let t_change = drift.t_change.ok_or_else(|| {
                    ConfigError::Invalid("sudden drift requires env.drift.t_change".into())
                })?;
                Ok(DriftSchedule::Sudden {
                    theta_start: self.surface_start.clone(),
                    theta_end: self.required_end()?,
                    t_change,
                })
            }
            "gradual" => {
                let drift = self.drift.as_ref().unwrap();
                let (t_begin, t_end) = match (drift.t_begin, drift.t_end) {
                    (Some(b), Some(e)) => (b, e),
                    _ => {
                        return Err(ConfigError::Invalid(
                            "gradual drift requires env.drift.t_begin and t_end".into(),
                        ))
                    }
                };
                Ok(DriftSchedule::Gradual {
                    theta_start: self.surface_start.clone(),
                    theta_end: self.required_end()?,
                    t_begin,
                    t_end,
                })
            }
            other => Err(ConfigError::Invalid(format!(
                "unknown drift kind '{other}' (expected none, sudden or gradual)"
            ))),
        }
    }

    fn required_end(&self) -> Result<SurfaceParams, ConfigError> {
        self.surface_end.clone().ok_or_else(|| {
            ConfigError::Invalid("drifting environments require env.surface_end".into())
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BanditAgentConfig {
    pub epsilon: f64,
    pub step_size: f64,
    pub bins: usize,
    #[serde(default)]
    pub optimism: f64,
}

impl BanditAgentConfig {
    pub fn to_bandit_config(&self, reward_spec: RewardSpec) -> BanditConfig {
        BanditConfig {
            epsilon: self.epsilon,
            step_size: self.step_size,
            bins_per_dimension: self.bins,
            reward_spec,
            optimism: self.optimism,
        }
    }
}

fn default_collection_target() -> usize {
    2000
}
fn default_n_trees() -> usize {
    50
}
fn default_max_depth() -> usize {
    8
}
fn default_min_group() -> usize {
    5
}
fn default_delta() -> f64 {
    0.002
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UrfAgentConfig {
    #[serde(default = "default_collection_target")]
    pub collection_target: usize,
    #[serde(default = "default_n_trees")]
    pub n_trees: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default = "default_min_group")]
    pub min_group: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl UrfAgentConfig {
    pub fn to_controller_config(&self, reward_spec: RewardSpec) -> ControllerConfig {
        ControllerConfig {
            collection_target: self.collection_target,
            forest: ForestParams {
                n_trees: self.n_trees,
                tree: TreeParams {
                    max_depth: self.max_depth,
                    min_group: self.min_group,
                },
                bootstrap: true,
                feature_subsampling: true,
            },
            delta: self.delta,
            reward_spec,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RandomAgentConfig {}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AgentsConfig {
    pub ucmab: Option<BanditAgentConfig>,
    pub cmab: Option<BanditAgentConfig>,
    pub urf: Option<UrfAgentConfig>,
    pub random: Option<RandomAgentConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub response: ResponseField,
    pub treatment_arm: TreatmentArm,
    #[serde(default = "default_holdout")]
    pub holdout_fraction: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_n_trees")]
    pub n_trees: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default = "default_min_group")]
    pub min_group: usize,
}

fn default_holdout() -> f64 {
    0.3
}
fn default_bins() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub reward: RewardConfig,
    pub env: Option<EnvConfig>,
    #[serde(default)]
    pub agents: AgentsConfig,
    pub dataset: Option<DatasetConfig>,
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: ExperimentConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    /// Full validation: reward spec, threshold range, environment
    /// surfaces, agent hyperparameters.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let spec = self.reward.to_spec();
        compute_threshold_checked(&spec)?;
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid("seeds must be non-empty".into()));
        }
        match self.kind {
            ExperimentKind::Simulate => {
                let env = self.env.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("simulate experiments require an [env] section".into())
                })?;
                // construct once to run the surface grid validation
                self.environment(env, spec, self.seeds[0])?;
                if self.agents.ucmab.is_none()
                    && self.agents.cmab.is_none()
                    && self.agents.urf.is_none()
                    && self.agents.random.is_none()
                {
                    return Err(ConfigError::Invalid(
                        "simulate experiments require at least one [agents.*] section".into(),
                    ));
                }
                for bandit in [&self.agents.ucmab, &self.agents.cmab].into_iter().flatten() {
                    bandit.to_bandit_config(spec).validate()?;
                }
                if let Some(urf) = &self.agents.urf {
                    // constructing checks delta and the collection target
                    crate::uplift_baseline::ControllerState::new(
                        urf.to_controller_config(spec),
                        0,
                    )?;
                }
            }
            ExperimentKind::Qini => {
                let dataset = self.dataset.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("qini experiments require a [dataset] section".into())
                })?;
                if !(0.0 < dataset.holdout_fraction && dataset.holdout_fraction < 1.0) {
                    return Err(ConfigError::Invalid(
                        "dataset.holdout_fraction must lie in (0, 1)".into(),
                    ));
                }
                if dataset.bins < 1 {
                    return Err(ConfigError::Invalid("dataset.bins must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn environment(
        &self,
        env: &EnvConfig,
        spec: RewardSpec,
        seed: u64,
    ) -> Result<Environment, ConfigError> {
        let schedule = env.schedule()?;
        Ok(Environment::new(EnvironmentSpec {
            dim: env.dim,
            schedule,
            reward_spec: spec,
            horizon: env.horizon,
            seed,
        })?)
    }
}
