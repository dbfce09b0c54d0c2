//! Closed-form decision math: uplift, the penalty-derived threshold, the
//! penalized expected reward, and the two equivalent treatment-selection
//! rules (threshold on uplift vs argmax over penalized rewards).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoreError {
    #[error("reward on response must be positive, got {0}")]
    NonPositiveReward(f64),
    #[error("reward on no-response is fixed to zero by convention, got {0}")]
    NonZeroBaseReward(f64),
    #[error("penalty must be finite, got {0}")]
    NonFinitePenalty(f64),
    #[error("probability out of range [0, 1]: {0}")]
    InvalidProbability(f64),
    #[error("threshold {0} outside the admissible range [-1, 1)")]
    ThresholdOutOfRange(f64),
}

/// Numeric payoff for each outcome plus the per-arm treatment penalties.
///
/// `reward_on_no_response` is fixed to zero: any constant offset cancels in
/// the argmax, and a zero base makes the expected reward exactly
/// `R(Y=1) * p(Y=1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub reward_on_response: f64,
    pub reward_on_no_response: f64,
    /// Penalties `(psi_0, psi_1)` for applying arm 0 / arm 1.
    pub penalties: (f64, f64),
}

impl RewardSpec {
    pub fn new(reward_on_response: f64, psi_0: f64, psi_1: f64) -> Result<Self, CoreError> {
        let spec = RewardSpec {
            reward_on_response,
            reward_on_no_response: 0.0,
            penalties: (psi_0, psi_1),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.reward_on_response > 0.0) || !self.reward_on_response.is_finite() {
            return Err(CoreError::NonPositiveReward(self.reward_on_response));
        }
        if self.reward_on_no_response != 0.0 {
            return Err(CoreError::NonZeroBaseReward(self.reward_on_no_response));
        }
        for psi in [self.penalties.0, self.penalties.1] {
            if !psi.is_finite() {
                return Err(CoreError::NonFinitePenalty(psi));
            }
        }
        Ok(())
    }

    pub fn penalty(&self, arm: Treatment) -> f64 {
        match arm {
            Treatment::Control => self.penalties.0,
            Treatment::Treated => self.penalties.1,
        }
    }

    /// Reward realized for outcome `y` before the penalty is deducted.
    pub fn reward(&self, y: Outcome) -> f64 {
        if y.responded {
            self.reward_on_response
        } else {
            self.reward_on_no_response
        }
    }
}

/// Binary treatment arm: control (`T=0`) or treated (`T=1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Treatment {
    Control,
    Treated,
}

impl Treatment {
    pub fn index(self) -> usize {
        match self {
            Treatment::Control => 0,
            Treatment::Treated => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Treatment::Control),
            1 => Some(Treatment::Treated),
            _ => None,
        }
    }
}

/// Binary response: `responded == true` means `Y=1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub responded: bool,
}

impl Outcome {
    pub fn responded() -> Self {
        Outcome { responded: true }
    }

    pub fn no_response() -> Self {
        Outcome { responded: false }
    }
}

/// An individual's feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextPoint {
    pub features: Vec<f64>,
}

impl ContextPoint {
    pub fn new(features: Vec<f64>) -> Self {
        ContextPoint { features }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// Treatment threshold `tau = (psi_1 - psi_0) / R(Y=1)`.
pub fn compute_threshold(spec: &RewardSpec) -> Result<f64, CoreError> {
    spec.validate()?;
    Ok((spec.penalties.1 - spec.penalties.0) / spec.reward_on_response)
}

/// Like [`compute_threshold`], additionally rejecting thresholds outside
/// `[-1, 1)`. Used at configuration validation time.
pub fn compute_threshold_checked(spec: &RewardSpec) -> Result<f64, CoreError> {
    let tau = compute_threshold(spec)?;
    if !(-1.0..1.0).contains(&tau) {
        return Err(CoreError::ThresholdOutOfRange(tau));
    }
    Ok(tau)
}

fn check_probability(p: f64) -> Result<(), CoreError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CoreError::InvalidProbability(p));
    }
    Ok(())
}

/// Incremental response probability `u = p1 - p0`.
pub fn uplift(p1: f64, p0: f64) -> Result<f64, CoreError> {
    check_probability(p1)?;
    check_probability(p0)?;
    Ok(p1 - p0)
}

/// Penalized expected reward `R(Y=1) * p - psi_arm` for the given arm.
pub fn penalized_expected_reward(
    p_response: f64,
    spec: &RewardSpec,
    arm: Treatment,
) -> Result<f64, CoreError> {
    check_probability(p_response)?;
    spec.validate()?;
    Ok(spec.reward_on_response * p_response - spec.penalty(arm))
}

/// Threshold rule: treat iff the uplift strictly exceeds `tau`.
/// Equality falls to control.
pub fn select_by_threshold(u_hat: f64, tau: f64) -> Treatment {
    if u_hat > tau {
        Treatment::Treated
    } else {
        Treatment::Control
    }
}

/// Argmax rule over the two penalized values. Ties resolve to control,
/// mirroring the strict inequality of the threshold rule.
pub fn select_by_argmax(r_u_control: f64, r_u_treated: f64) -> Treatment {
    if r_u_treated > r_u_control {
        Treatment::Treated
    } else {
        Treatment::Control
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_examples() {
        let spec = RewardSpec::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(compute_threshold(&spec).unwrap(), 0.0);
        let spec = RewardSpec::new(1.0, 0.0, 0.2).unwrap();
        assert_eq!(compute_threshold(&spec).unwrap(), 0.2);
        let spec = RewardSpec::new(2.0, 0.1, 0.5).unwrap();
        assert_eq!(compute_threshold(&spec).unwrap(), 0.2);
    }

    #[test]
    fn invalid_reward_rejected() {
        assert!(matches!(
            RewardSpec::new(0.0, 0.0, 0.0),
            Err(CoreError::NonPositiveReward(_))
        ));
        assert!(matches!(
            RewardSpec::new(-1.0, 0.0, 0.0),
            Err(CoreError::NonPositiveReward(_))
        ));
        assert!(matches!(
            RewardSpec::new(1.0, f64::NAN, 0.0),
            Err(CoreError::NonFinitePenalty(_))
        ));
    }

    #[test]
    fn threshold_range_check() {
        let spec = RewardSpec::new(1.0, 0.0, 1.5).unwrap();
        assert!(matches!(
            compute_threshold_checked(&spec),
            Err(CoreError::ThresholdOutOfRange(_))
        ));
        let spec = RewardSpec::new(1.0, 0.0, 0.5).unwrap();
        assert_eq!(compute_threshold_checked(&spec).unwrap(), 0.5);
        // tau = 1 is excluded, tau just below is fine
        let spec = RewardSpec::new(1.0, 0.0, 1.0).unwrap();
        assert!(compute_threshold_checked(&spec).is_err());
    }

    #[test]
    fn uplift_examples() {
        assert_eq!(uplift(0.5, 0.5).unwrap(), 0.0);
        assert_eq!(uplift(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(uplift(0.0, 1.0).unwrap(), -1.0);
        assert!(uplift(1.2, 0.0).is_err());
        assert!(uplift(0.5, -0.1).is_err());
    }

    #[test]
    fn penalized_reward_examples() {
        let spec = RewardSpec::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(
            penalized_expected_reward(0.5, &spec, Treatment::Treated).unwrap(),
            0.5
        );
        let spec = RewardSpec::new(2.0, 0.0, 0.1).unwrap();
        assert_eq!(
            penalized_expected_reward(0.3, &spec, Treatment::Treated).unwrap(),
            0.5
        );
        let spec = RewardSpec::new(1.0, 0.0, 0.2).unwrap();
        assert_eq!(
            penalized_expected_reward(0.0, &spec, Treatment::Treated).unwrap(),
            -0.2
        );
        assert!(penalized_expected_reward(1.5, &spec, Treatment::Control).is_err());
    }

    #[test]
    fn threshold_rule_examples() {
        assert_eq!(select_by_threshold(0.3, 0.2), Treatment::Treated);
        assert_eq!(select_by_threshold(0.2, 0.2), Treatment::Control);
        assert_eq!(select_by_threshold(-0.1, 0.0), Treatment::Control);
    }

    #[test]
    fn argmax_rule_examples() {
        assert_eq!(select_by_argmax(0.4, 0.5), Treatment::Treated);
        assert_eq!(select_by_argmax(0.5, 0.5), Treatment::Control);
        // p1=0.6, p0=0.3, R=1, psi=(0, 0.2): penalized values (0.3, 0.4)
        let spec = RewardSpec::new(1.0, 0.0, 0.2).unwrap();
        let r0 = penalized_expected_reward(0.3, &spec, Treatment::Control).unwrap();
        let r1 = penalized_expected_reward(0.6, &spec, Treatment::Treated).unwrap();
        assert!((r0 - 0.3).abs() < 1e-12 && (r1 - 0.4).abs() < 1e-12);
        assert_eq!(select_by_argmax(r0, r1), Treatment::Treated);
        let tau = compute_threshold(&spec).unwrap();
        assert_eq!(
            select_by_threshold(uplift(0.6, 0.3).unwrap(), tau),
            Treatment::Treated
        );
    }

    #[test]
    fn equal_penalties_reduce_to_plain_cmab() {
        let spec = RewardSpec::new(3.0, 0.4, 0.4).unwrap();
        assert_eq!(compute_threshold(&spec).unwrap(), 0.0);
        // with equal penalties the argmax over penalized values equals the
        // argmax over raw expected rewards
        for (p0, p1) in [(0.1, 0.9), (0.7, 0.2), (0.5, 0.5)] {
            let r0 = penalized_expected_reward(p0, &spec, Treatment::Control).unwrap();
            let r1 = penalized_expected_reward(p1, &spec, Treatment::Treated).unwrap();
            let plain = if 3.0 * p1 > 3.0 * p0 {
                Treatment::Treated
            } else {
                Treatment::Control
            };
            assert_eq!(select_by_argmax(r0, r1), plain);
        }
    }
}
