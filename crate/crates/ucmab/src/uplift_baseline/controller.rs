//! Collect / deploy / retrain state machine around the uplift forest.
//!
//! While collecting, treatments are assigned uniformly at random (a
//! randomized trial) and buffered; once the buffer reaches its target the
//! forest is fitted and deployed. While deployed, a per-decision
//! correctness signal is fed to ADWIN; a detection discards the model and
//! starts a fresh collection phase.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adwin::AdwinDetector;
use super::forest::{fit_forest, ForestParams, UpliftForest};
use super::tree::LabeledExample;
use super::BaselineError;
use crate::core::{select_by_threshold, ContextPoint, Outcome, RewardSpec, Treatment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Collecting,
    Deployed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransition {
    /// Controller-local step count (feedback calls seen) at the switch.
    pub step: u64,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub collection_target: usize,
    pub forest: ForestParams,
    /// ADWIN confidence parameter.
    pub delta: f64,
    pub reward_spec: RewardSpec,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            collection_target: 2000,
            forest: ForestParams::default(),
            delta: 0.002,
            reward_spec: RewardSpec {
                reward_on_response: 1.0,
                reward_on_no_response: 0.0,
                penalties: (0.0, 0.0),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllerState {
    pub config: ControllerConfig,
    pub phase: Phase,
    pub tau: f64,
    buffer: Vec<LabeledExample>,
    pub model: Option<UpliftForest>,
    pub detector: AdwinDetector,
    rng: ChaCha8Rng,
    steps: u64,
    /// Phase switches, for post-hoc analysis of collection periods.
    pub transitions: Vec<PhaseTransition>,
}

impl ControllerState {
    pub fn new(config: ControllerConfig, seed: u64) -> Result<Self, BaselineError> {
        if config.collection_target == 0 {
            return Err(BaselineError::InvalidCollectionTarget);
        }
        let detector = AdwinDetector::new(config.delta)?;
        let tau = crate::core::compute_threshold(&config.reward_spec)
            .expect("reward spec validated by caller");
        Ok(ControllerState {
            config,
            phase: Phase::Collecting,
            tau,
            buffer: Vec::new(),
            model: None,
            detector,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
            transitions: Vec::new(),
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    /// Random assignment while collecting, thresholded forest prediction
    /// once deployed.
    pub fn act(&mut self, x: &ContextPoint) -> Result<Treatment, BaselineError> {
        match self.phase {
            Phase::Collecting => {
                Ok(Treatment::from_index(self.rng.random_range(0..2usize)).unwrap())
            }
            Phase::Deployed => {
                let model = self.model.as_ref().ok_or(BaselineError::Unfitted)?;
                Ok(select_by_threshold(model.predict_uplift(x), self.tau))
            }
        }
    }

    /// Feed back one observed decision. `correctness_signal` must lie in
    /// [0, 1]; it is only consulted while deployed.
    pub fn feedback(
        &mut self,
        x: &ContextPoint,
        arm: Treatment,
        y: Outcome,
        correctness_signal: f64,
    ) -> Result<(), BaselineError> {
        if !(0.0..=1.0).contains(&correctness_signal) {
            return Err(BaselineError::InvalidSignal(correctness_signal));
        }
        self.steps += 1;
        match self.phase {
            Phase::Collecting => {
                self.buffer.push(LabeledExample {
                    x: x.clone(),
                    arm,
                    y,
                });
                if self.buffer.len() >= self.config.collection_target {
                    let fit_seed = self.rng.random();
                    let model = fit_forest(&self.buffer, self.config.forest, fit_seed)?;
                    self.model = Some(model);
                    self.phase = Phase::Deployed;
                    self.detector.reset();
                    self.transitions.push(PhaseTransition {
                        step: self.steps,
                        phase: Phase::Deployed,
                    });
                }
            }
            Phase::Deployed => {
                if self.detector.observe(correctness_signal)? {
                    self.model = None;
                    self.buffer.clear();
                    self.phase = Phase::Collecting;
                    self.transitions.push(PhaseTransition {
                        step: self.steps,
                        phase: Phase::Collecting,
                    });
                }
            }
        }
        Ok(())
    }

    /// Rescale a realized penalized reward to the [0, 1] signal ADWIN
    /// monitors, using the extremes reachable under the reward spec.
    pub fn correctness_signal(&self, realized: f64) -> f64 {
        let spec = &self.config.reward_spec;
        let candidates = [
            spec.reward_on_response - spec.penalties.0,
            spec.reward_on_response - spec.penalties.1,
            spec.reward_on_no_response - spec.penalties.0,
            spec.reward_on_no_response - spec.penalties.1,
        ];
        let lo = candidates.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = candidates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return 0.5;
        }
        ((realized - lo) / (hi - lo)).clamp(0.0, 1.0)
    }
}
