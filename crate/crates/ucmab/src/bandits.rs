//! Online agents: the uplifted contextual bandit (U-CMAB) and the plain
//! CMAB baseline. Both use epsilon-greedy selection over a uniform-grid
//! tabular estimator with a constant step-size tracking update; the only
//! difference is whether the configured penalties are kept or zeroed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{select_by_argmax, ContextPoint, CoreError, Outcome, RewardSpec, Treatment};

#[derive(Debug, Error)]
pub enum BanditError {
    #[error("epsilon must be in [0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("step size must be in (0, 1], got {0}")]
    InvalidStepSize(f64),
    #[error("bins per dimension must be >= 1, got {0}")]
    InvalidBins(usize),
    #[error("context has {got} dimensions, agent expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("reward must be finite, got {0}")]
    NonFiniteReward(f64),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Agent hyperparameters. `epsilon` and `step_size` stay constant over
/// time; constant step-size is what lets the estimator track a drifting
/// target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    pub epsilon: f64,
    pub step_size: f64,
    pub bins_per_dimension: usize,
    pub reward_spec: RewardSpec,
    /// Initial value for every (cell, arm) estimate.
    pub optimism: f64,
}

impl BanditConfig {
    pub fn validate(&self) -> Result<(), BanditError> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(BanditError::InvalidEpsilon(self.epsilon));
        }
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(BanditError::InvalidStepSize(self.step_size));
        }
        if self.bins_per_dimension < 1 {
            return Err(BanditError::InvalidBins(self.bins_per_dimension));
        }
        self.reward_spec.validate()?;
        Ok(())
    }
}

/// Per-arm value table over a uniform grid covering the context
/// bounding box. Cell count is `bins_per_dimension ^ n` per arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueEstimator {
    /// Estimates laid out as `table[cell * 2 + arm]`.
    table: Vec<f64>,
    bins_per_dimension: usize,
    /// Per-dimension `(low, high)` of the context bounding box.
    bounds: Vec<(f64, f64)>,
}

impl ValueEstimator {
    pub fn new(bins_per_dimension: usize, bounds: Vec<(f64, f64)>, initial: f64) -> Self {
        let n_cells = bins_per_dimension.pow(bounds.len() as u32);
        ValueEstimator {
            table: vec![initial; n_cells * 2],
            bins_per_dimension,
            bounds,
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn n_cells(&self) -> usize {
        self.table.len() / 2
    }

    /// Flat index of the grid cell containing `x`. Points outside the
    /// bounding box are clamped to the edge cells.
    pub fn cell_of(&self, x: &ContextPoint) -> Result<usize, BanditError> {
        if x.dim() != self.dim() {
            return Err(BanditError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let bins = self.bins_per_dimension;
        let mut index = 0usize;
        for (value, (lo, hi)) in x.features.iter().zip(&self.bounds) {
            let span = hi - lo;
            let frac = if span > 0.0 { (value - lo) / span } else { 0.0 };
            let bin = ((frac * bins as f64) as isize).clamp(0, bins as isize - 1) as usize;
            index = index * bins + bin;
        }
        Ok(index)
    }

    pub fn value(&self, cell: usize, arm: Treatment) -> f64 {
        self.table[cell * 2 + arm.index()]
    }

    fn value_mut(&mut self, cell: usize, arm: Treatment) -> &mut f64 {
        &mut self.table[cell * 2 + arm.index()]
    }
}

/// Full agent state: config, value table, step counter, RNG. Serializable
/// to JSON for checkpoint/resume (see `docs/schemas.md` in the repo root).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentState {
    pub config: BanditConfig,
    pub estimator: ValueEstimator,
    pub steps_taken: u64,
    rng: ChaCha8Rng,
}

impl AgentState {
    fn new(config: BanditConfig, bounds: Vec<(f64, f64)>, seed: u64) -> Result<Self, BanditError> {
        config.validate()?;
        let estimator = ValueEstimator::new(config.bins_per_dimension, bounds, config.optimism);
        Ok(AgentState {
            config,
            estimator,
            steps_taken: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Epsilon-greedy action selection over the cell estimates.
    pub fn act(&mut self, x: &ContextPoint) -> Result<Treatment, BanditError> {
        let cell = self.estimator.cell_of(x)?;
        self.steps_taken += 1;
        let explore = self.rng.random::<f64>() < self.config.epsilon;
        if explore {
            let arm = Treatment::from_index(self.rng.random_range(0..2usize)).unwrap();
            return Ok(arm);
        }
        Ok(select_by_argmax(
            self.estimator.value(cell, Treatment::Control),
            self.estimator.value(cell, Treatment::Treated),
        ))
    }

    /// Constant step-size tracking update for the visited (cell, arm) only:
    /// `Q <- Q + alpha * (reward - Q)`.
    pub fn update(
        &mut self,
        x: &ContextPoint,
        arm: Treatment,
        reward: f64,
    ) -> Result<(), BanditError> {
        if !reward.is_finite() {
            return Err(BanditError::NonFiniteReward(reward));
        }
        let cell = self.estimator.cell_of(x)?;
        let alpha = self.config.step_size;
        let q = self.estimator.value_mut(cell, arm);
        *q += alpha * (reward - *q);
        Ok(())
    }

    pub fn reward_spec(&self) -> &RewardSpec {
        &self.config.reward_spec
    }
}

/// Reward as actually observed after a decision: `R(y) - psi_arm`.
pub fn realized_reward(y: Outcome, arm: Treatment, spec: &RewardSpec) -> f64 {
    spec.reward(y) - spec.penalty(arm)
}

/// U-CMAB agent: keeps the configured penalties so its greedy policy
/// matches the threshold rule with `tau = (psi_1 - psi_0) / R`.
pub fn make_ucmab(
    config: BanditConfig,
    bounds: Vec<(f64, f64)>,
    seed: u64,
) -> Result<AgentState, BanditError> {
    AgentState::new(config, bounds, seed)
}

/// Plain CMAB baseline: identical machinery with both penalties forced
/// to zero, so its greedy policy maximizes raw expected reward.
pub fn make_cmab(
    mut config: BanditConfig,
    bounds: Vec<(f64, f64)>,
    seed: u64,
) -> Result<AgentState, BanditError> {
    config.reward_spec.penalties = (0.0, 0.0);
    AgentState::new(config, bounds, seed)
}
