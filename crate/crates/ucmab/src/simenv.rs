//! Parametric non-stationary environment: logistic uplift surfaces over a
//! uniform context distribution, with no-drift / sudden / gradual drift
//! schedules, plus the all-knowing causal oracle and the per-decision
//! regret metric.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandits::{realized_reward, AgentState};
use crate::core::{
    compute_threshold, select_by_threshold, ContextPoint, Outcome, RewardSpec, Treatment,
};
use crate::eval::RegretTrace;
use crate::uplift_baseline::ControllerState;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("surface parameter vectors must have dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("surface violates probability bounds at x = {x:?}, t = {t}: b = {b}, b + u = {bu}")]
    SurfaceOutOfRange { x: Vec<f64>, t: u64, b: f64, bu: f64 },
    #[error("gradual drift requires t_begin < t_end, got [{t_begin}, {t_end}]")]
    InvalidDriftInterval { t_begin: u64, t_end: u64 },
    #[error("horizon must be >= 1")]
    InvalidHorizon,
    #[error("step {t} is past the horizon {horizon}")]
    PastHorizon { t: u64, horizon: u64 },
    #[error("classification requires deterministic response probabilities, got p0 = {p0}, p1 = {p1}")]
    NonDeterministicSurface { p0: f64, p1: f64 },
    #[error("policy failure: {0}")]
    Policy(String),
    #[error(transparent)]
    Core(#[from] crate::core::CoreError),
}

/// Drift-able parameter vector of the response surfaces,
/// `u(x) = u_max * sigmoid(k * (w . x + c)) - u_shift` and
/// `b(x) = clamp(w_b . x + c_b, b_lo, b_hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParams {
    pub w: Vec<f64>,
    pub c: f64,
    pub k: f64,
    pub u_max: f64,
    pub u_shift: f64,
    pub w_b: Vec<f64>,
    pub c_b: f64,
    pub b_lo: f64,
    pub b_hi: f64,
}

impl SurfaceParams {
    /// Componentwise linear interpolation between two parameter vectors.
    pub fn interpolate(start: &SurfaceParams, end: &SurfaceParams, frac: f64) -> SurfaceParams {
        let lerp = |a: f64, b: f64| a + (b - a) * frac;
        SurfaceParams {
            w: start
                .w
                .iter()
                .zip(&end.w)
                .map(|(&a, &b)| lerp(a, b))
                .collect(),
            c: lerp(start.c, end.c),
            k: lerp(start.k, end.k),
            u_max: lerp(start.u_max, end.u_max),
            u_shift: lerp(start.u_shift, end.u_shift),
            w_b: start
                .w_b
                .iter()
                .zip(&end.w_b)
                .map(|(&a, &b)| lerp(a, b))
                .collect(),
            c_b: lerp(start.c_b, end.c_b),
            b_lo: lerp(start.b_lo, end.b_lo),
            b_hi: lerp(start.b_hi, end.b_hi),
        }
    }

    /// Response rate under control.
    pub fn base(&self, x: &ContextPoint) -> f64 {
        let dot: f64 = self.w_b.iter().zip(&x.features).map(|(a, b)| a * b).sum();
        (dot + self.c_b).clamp(self.b_lo, self.b_hi)
    }

    /// Ground-truth uplift.
    pub fn lift(&self, x: &ContextPoint) -> f64 {
        let dot: f64 = self.w.iter().zip(&x.features).map(|(a, b)| a * b).sum();
        let z = self.k * (dot + self.c);
        self.u_max * sigmoid(z) - self.u_shift
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftSchedule {
    None {
        theta: SurfaceParams,
    },
    Sudden {
        theta_start: SurfaceParams,
        theta_end: SurfaceParams,
        t_change: u64,
    },
    Gradual {
        theta_start: SurfaceParams,
        theta_end: SurfaceParams,
        t_begin: u64,
        t_end: u64,
    },
}

impl DriftSchedule {
    /// Effective parameters at step `t`. Sudden drift switches exactly at
    /// `t_change`; gradual drift interpolates linearly over the interval.
    pub fn params_at(&self, t: u64) -> SurfaceParams {
        match self {
            DriftSchedule::None { theta } => theta.clone(),
            DriftSchedule::Sudden {
                theta_start,
                theta_end,
                t_change,
            } => {
                if t < *t_change {
                    theta_start.clone()
                } else {
                    theta_end.clone()
                }
            }
            DriftSchedule::Gradual {
                theta_start,
                theta_end,
                t_begin,
                t_end,
            } => {
                if t <= *t_begin {
                    theta_start.clone()
                } else if t >= *t_end {
                    theta_end.clone()
                } else {
                    let frac = (t - t_begin) as f64 / (t_end - t_begin) as f64;
                    SurfaceParams::interpolate(theta_start, theta_end, frac)
                }
            }
        }
    }

    /// Step indices worth marking on regret plots.
    pub fn markers(&self) -> Vec<u64> {
        match self {
            DriftSchedule::None { .. } => vec![],
            DriftSchedule::Sudden { t_change, .. } => vec![*t_change],
            DriftSchedule::Gradual { t_begin, t_end, .. } => vec![*t_begin, *t_end],
        }
    }

    fn endpoints(&self) -> Vec<&SurfaceParams> {
        match self {
            DriftSchedule::None { theta } => vec![theta],
            DriftSchedule::Sudden {
                theta_start,
                theta_end,
                ..
            }
            | DriftSchedule::Gradual {
                theta_start,
                theta_end,
                ..
            } => vec![theta_start, theta_end],
        }
    }
}

/// Fully specified stochastic process: context dimension, surfaces with a
/// drift schedule, reward spec, horizon, and the seed that pins every
/// random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub dim: usize,
    pub schedule: DriftSchedule,
    pub reward_spec: RewardSpec,
    pub horizon: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    spec: EnvironmentSpec,
    tau: f64,
}

/// Which of the four causal archetypes a deterministic individual is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndividualType {
    /// Persuadable: responds only when treated.
    X1,
    /// Lost cause: never responds.
    X2,
    /// Sure thing: always responds.
    X3,
    /// Do-not-disturb: responds only when untreated.
    X4,
}

impl Environment {
    /// Validate and build. Surfaces are checked on a dense grid (1000
    /// points per dimension pair) at the schedule endpoints and at
    /// intermediate interpolation fractions.
    pub fn new(spec: EnvironmentSpec) -> Result<Self, EnvError> {
        if spec.horizon < 1 {
            return Err(EnvError::InvalidHorizon);
        }
        if let DriftSchedule::Gradual { t_begin, t_end, .. } = &spec.schedule {
            if t_begin >= t_end {
                return Err(EnvError::InvalidDriftInterval {
                    t_begin: *t_begin,
                    t_end: *t_end,
                });
            }
        }
        for theta in spec.schedule.endpoints() {
            for v in [&theta.w, &theta.w_b] {
                if v.len() != spec.dim {
                    return Err(EnvError::DimensionMismatch {
                        expected: spec.dim,
                        got: v.len(),
                    });
                }
            }
        }
        let tau = compute_threshold(&spec.reward_spec)?;
        let env = Environment { spec, tau };
        env.validate_surfaces()?;
        Ok(env)
    }

    fn validate_surfaces(&self) -> Result<(), EnvError> {
        // interpolation can violate bounds even when endpoints hold, so
        // check several fractions along the schedule
        let times: Vec<u64> = match &self.spec.schedule {
            DriftSchedule::None { .. } => vec![0],
            DriftSchedule::Sudden { t_change, .. } => vec![0, *t_change],
            DriftSchedule::Gradual { t_begin, t_end, .. } => (0..=10)
                .map(|i| t_begin + (t_end - t_begin) * i / 10)
                .collect(),
        };
        for &t in &times {
            let theta = self.spec.schedule.params_at(t);
            for x in validation_grid(self.spec.dim) {
                let point = ContextPoint::new(x);
                let b = theta.base(&point);
                let bu = b + theta.lift(&point);
                if !(0.0..=1.0).contains(&b) || !(0.0..=1.0).contains(&bu) {
                    return Err(EnvError::SurfaceOutOfRange {
                        x: point.features,
                        t,
                        b,
                        bu,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn reward_spec(&self) -> &RewardSpec {
        &self.spec.reward_spec
    }

    /// Per-dimension bounding box of the context distribution.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0); self.spec.dim]
    }

    /// Draw a context uniformly from the unit box.
    pub fn sample_context(&self, rng: &mut ChaCha8Rng) -> ContextPoint {
        ContextPoint::new((0..self.spec.dim).map(|_| rng.random()).collect())
    }

    /// Ground-truth response probability `p(Y=1 | arm, x)` at step `t`.
    pub fn true_probability(
        &self,
        x: &ContextPoint,
        arm: Treatment,
        t: u64,
    ) -> Result<f64, EnvError> {
        if t >= self.spec.horizon {
            return Err(EnvError::PastHorizon {
                t,
                horizon: self.spec.horizon,
            });
        }
        let theta = self.spec.schedule.params_at(t);
        let b = theta.base(x);
        Ok(match arm {
            Treatment::Control => b,
            Treatment::Treated => b + theta.lift(x),
        })
    }

    /// Bernoulli response draw.
    pub fn respond(
        &self,
        x: &ContextPoint,
        arm: Treatment,
        t: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Outcome, EnvError> {
        let p = self.true_probability(x, arm, t)?;
        Ok(Outcome {
            responded: rng.random::<f64>() < p,
        })
    }

    /// The all-knowing oracle: treat iff the true uplift strictly exceeds
    /// the threshold derived from the reward spec.
    pub fn optimal_action(&self, x: &ContextPoint, t: u64) -> Result<Treatment, EnvError> {
        if t >= self.spec.horizon {
            return Err(EnvError::PastHorizon {
                t,
                horizon: self.spec.horizon,
            });
        }
        let u = self.spec.schedule.params_at(t).lift(x);
        Ok(select_by_threshold(u, self.tau))
    }

    /// Causal archetype of `x` at `t`; defined only for deterministic
    /// surfaces where both response probabilities are exactly 0 or 1.
    pub fn classify_individual(&self, x: &ContextPoint, t: u64) -> Result<IndividualType, EnvError> {
        let p0 = self.true_probability(x, Treatment::Control, t)?;
        let p1 = self.true_probability(x, Treatment::Treated, t)?;
        let as_bit = |p: f64| -> Option<bool> {
            if p == 0.0 {
                Some(false)
            } else if p == 1.0 {
                Some(true)
            } else {
                None
            }
        };
        match (as_bit(p0), as_bit(p1)) {
            (Some(false), Some(true)) => Ok(IndividualType::X1),
            (Some(false), Some(false)) => Ok(IndividualType::X2),
            (Some(true), Some(true)) => Ok(IndividualType::X3),
            (Some(true), Some(false)) => Ok(IndividualType::X4),
            _ => Err(EnvError::NonDeterministicSurface { p0, p1 }),
        }
    }
}

fn validation_grid(dim: usize) -> Vec<Vec<f64>> {
    let mut points = Vec::new();
    match dim {
        0 => {}
        1 => {
            for i in 0..1000 {
                points.push(vec![i as f64 / 999.0]);
            }
        }
        _ => {
            // ~1000 points per dimension pair, remaining coordinates at
            // the box center and corners
            let side = 32;
            for i in 0..dim {
                for j in (i + 1)..dim {
                    for a in 0..side {
                        for b in 0..side {
                            let mut x = vec![0.5; dim];
                            x[i] = a as f64 / (side - 1) as f64;
                            x[j] = b as f64 / (side - 1) as f64;
                            points.push(x);
                        }
                    }
                }
            }
            for corner in 0..(1u32 << dim.min(10)) {
                let x: Vec<f64> = (0..dim)
                    .map(|d| if corner >> d & 1 == 1 { 1.0 } else { 0.0 })
                    .collect();
                points.push(x);
            }
        }
    }
    points
}

/// Binary causal regret: 1 iff the chosen treatment differs from the
/// oracle's.
pub fn step_regret(chosen: Treatment, optimal: Treatment) -> f64 {
    if chosen == optimal {
        0.0
    } else {
        1.0
    }
}

/// Anything that can act in an episode and absorb feedback.
/// `t` is the episode step; the bandit agents ignore it.
///
/// The environment reports only the outcome; each policy derives its own
/// realized penalized reward from its reward spec, so a plain CMAB (whose
/// penalties are zeroed) sees unpenalized rewards.
pub trait Policy {
    fn act(&mut self, t: u64, x: &ContextPoint) -> Result<Treatment, EnvError>;
    fn feedback(
        &mut self,
        t: u64,
        x: &ContextPoint,
        arm: Treatment,
        y: Outcome,
    ) -> Result<(), EnvError>;
}

impl Policy for AgentState {
    fn act(&mut self, _t: u64, x: &ContextPoint) -> Result<Treatment, EnvError> {
        AgentState::act(self, x).map_err(|e| EnvError::Policy(e.to_string()))
    }

    fn feedback(
        &mut self,
        _t: u64,
        x: &ContextPoint,
        arm: Treatment,
        y: Outcome,
    ) -> Result<(), EnvError> {
        let reward = realized_reward(y, arm, self.reward_spec());
        self.update(x, arm, reward)
            .map_err(|e| EnvError::Policy(e.to_string()))
    }
}

impl Policy for ControllerState {
    fn act(&mut self, _t: u64, x: &ContextPoint) -> Result<Treatment, EnvError> {
        ControllerState::act(self, x).map_err(|e| EnvError::Policy(e.to_string()))
    }

    fn feedback(
        &mut self,
        _t: u64,
        x: &ContextPoint,
        arm: Treatment,
        y: Outcome,
    ) -> Result<(), EnvError> {
        let reward = realized_reward(y, arm, &self.config.reward_spec);
        let signal = self.correctness_signal(reward);
        ControllerState::feedback(self, x, arm, y, signal)
            .map_err(|e| EnvError::Policy(e.to_string()))
    }
}

/// Uniform-random assignment; the paper's 0.5-regret reference level.
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        RandomPolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _t: u64, _x: &ContextPoint) -> Result<Treatment, EnvError> {
        Ok(Treatment::from_index(self.rng.random_range(0..2usize)).unwrap())
    }

    fn feedback(
        &mut self,
        _t: u64,
        _x: &ContextPoint,
        _arm: Treatment,
        _y: Outcome,
    ) -> Result<(), EnvError> {
        Ok(())
    }
}

/// Plays the oracle's own decision; useful as a self-comparison fixture.
pub struct OraclePolicy {
    env: Environment,
}

impl OraclePolicy {
    pub fn new(env: Environment) -> Self {
        OraclePolicy { env }
    }
}

impl Policy for OraclePolicy {
    fn act(&mut self, t: u64, x: &ContextPoint) -> Result<Treatment, EnvError> {
        self.env.optimal_action(x, t)
    }

    fn feedback(
        &mut self,
        _t: u64,
        _x: &ContextPoint,
        _arm: Treatment,
        _y: Outcome,
    ) -> Result<(), EnvError> {
        Ok(())
    }
}

/// Run one full episode: sample context, query the policy, draw the
/// outcome, feed the observation back to the policy, and score each
/// decision against the causal oracle.
pub fn run_episode(
    env: &Environment,
    policy: &mut dyn Policy,
    window: usize,
) -> Result<RegretTrace, EnvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(env.spec.seed);
    let horizon = env.spec.horizon;
    let mut raw = Vec::with_capacity(horizon as usize);
    for t in 0..horizon {
        let x = env.sample_context(&mut rng);
        let arm = policy.act(t, &x)?;
        let y = env.respond(&x, arm, t, &mut rng)?;
        policy.feedback(t, &x, arm, y)?;
        let optimal = env.optimal_action(&x, t)?;
        raw.push(step_regret(arm, optimal));
    }
    Ok(RegretTrace::from_raw(
        raw,
        window,
        env.spec.schedule.markers(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn flat_surface(dim: usize, base: f64, lift_level: f64) -> SurfaceParams {
        // constant b(x) = base; u(x) ~= lift_level via a saturated logistic
        SurfaceParams {
            w: vec![0.0; dim],
            c: 0.0,
            k: 1.0,
            u_max: 2.0 * lift_level,
            u_shift: 0.0,
            w_b: vec![0.0; dim],
            c_b: base,
            b_lo: 0.0,
            b_hi: 1.0,
        }
    }

    fn static_env(dim: usize, theta: SurfaceParams, seed: u64) -> Environment {
        Environment::new(EnvironmentSpec {
            dim,
            schedule: DriftSchedule::None { theta },
            reward_spec: RewardSpec::new(1.0, 0.0, 0.2).unwrap(),
            horizon: 100_000,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn sample_context_is_deterministic_and_in_bounds() {
        let env = static_env(3, flat_surface(3, 0.4, 0.0), 5);
        let mut rng1 = ChaCha8Rng::seed_from_u64(9);
        let mut rng2 = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = env.sample_context(&mut rng1);
            let b = env.sample_context(&mut rng2);
            assert_eq!(a, b);
            assert!(a.features.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn sample_context_moments() {
        let env = static_env(2, flat_surface(2, 0.4, 0.0), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sums = [0.0f64; 2];
        for _ in 0..10_000 {
            let x = env.sample_context(&mut rng);
            sums[0] += x.features[0];
            sums[1] += x.features[1];
        }
        for s in sums {
            let mean = s / 10_000.0;
            assert!((0.47..=0.53).contains(&mean), "mean {mean}");
        }
    }

    #[test]
    fn zero_lift_makes_arms_equal() {
        let env = static_env(2, flat_surface(2, 0.35, 0.0), 0);
        let x = ContextPoint::new(vec![0.2, 0.8]);
        let p0 = env.true_probability(&x, Treatment::Control, 10).unwrap();
        let p1 = env.true_probability(&x, Treatment::Treated, 10).unwrap();
        assert_eq!(p0, p1);
        assert_eq!(p0, 0.35);
    }

    #[test]
    fn sudden_schedule_switches_exactly_at_t_change() {
        let start = flat_surface(1, 0.2, 0.0);
        let end = flat_surface(1, 0.8, 0.0);
        let env = Environment::new(EnvironmentSpec {
            dim: 1,
            schedule: DriftSchedule::Sudden {
                theta_start: start,
                theta_end: end,
                t_change: 500,
            },
            reward_spec: RewardSpec::new(1.0, 0.0, 0.0).unwrap(),
            horizon: 1000,
            seed: 0,
        })
        .unwrap();
        let x = ContextPoint::new(vec![0.5]);
        assert_eq!(
            env.true_probability(&x, Treatment::Control, 499).unwrap(),
            0.2
        );
        assert_eq!(
            env.true_probability(&x, Treatment::Control, 500).unwrap(),
            0.8
        );
    }

    #[test]
    fn gradual_schedule_interpolates_linearly() {
        let start = flat_surface(1, 0.2, 0.0);
        let end = flat_surface(1, 0.6, 0.0);
        let schedule = DriftSchedule::Gradual {
            theta_start: start.clone(),
            theta_end: end.clone(),
            t_begin: 100,
            t_end: 300,
        };
        assert_eq!(schedule.params_at(100), start);
        assert_eq!(schedule.params_at(300), end);
        let mid = schedule.params_at(200);
        assert!((mid.c_b - 0.4).abs() < 1e-12);
        // componentwise between the endpoints everywhere in the interval
        for t in 100..=300 {
            let p = schedule.params_at(t);
            assert!(p.c_b >= 0.2 - 1e-12 && p.c_b <= 0.6 + 1e-12);
        }
    }

    #[test]
    fn respond_extremes_and_rate() {
        let always = static_env(1, flat_surface(1, 1.0, 0.0), 1);
        let never = static_env(1, flat_surface(1, 0.0, 0.0), 1);
        let x = ContextPoint::new(vec![0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in 0..100 {
            assert!(always.respond(&x, Treatment::Control, t, &mut rng).unwrap().responded);
            assert!(!never.respond(&x, Treatment::Control, t, &mut rng).unwrap().responded);
        }
        let env = static_env(1, flat_surface(1, 0.3, 0.0), 1);
        let mut hits = 0u64;
        for _ in 0..100_000 {
            if env.respond(&x, Treatment::Control, 0, &mut rng).unwrap().responded {
                hits += 1;
            }
        }
        let rate = hits as f64 / 100_000.0;
        assert!((0.29..=0.31).contains(&rate), "rate {rate}");
    }

    #[test]
    fn optimal_action_thresholds_true_lift() {
        // u(x) = 0.5 everywhere, tau = 0.2 -> treat
        let env = static_env(1, flat_surface(1, 0.2, 0.5), 0);
        let x = ContextPoint::new(vec![0.5]);
        assert_eq!(env.optimal_action(&x, 0).unwrap(), Treatment::Treated);
        // u(x) = 0.2 exactly -> strict inequality falls to control
        let env = static_env(1, flat_surface(1, 0.2, 0.2), 0);
        assert_eq!(env.optimal_action(&x, 0).unwrap(), Treatment::Control);
    }

    #[test]
    fn classify_deterministic_individuals() {
        // b = 0, u = 1: persuadable
        let x = ContextPoint::new(vec![0.5]);
        let env = static_env(1, flat_surface(1, 0.0, 0.5), 0); // u saturates to 1? no: 2*0.5*sigmoid(0)=0.5
        assert!(env.classify_individual(&x, 0).is_err());
        let persuadable = SurfaceParams {
            u_max: 1.0,
            u_shift: 0.0,
            k: 1.0,
            w: vec![0.0],
            c: f64::INFINITY, // saturate sigmoid at 1 exactly
            w_b: vec![0.0],
            c_b: 0.0,
            b_lo: 0.0,
            b_hi: 1.0,
        };
        let env = static_env(1, persuadable.clone(), 0);
        assert_eq!(env.classify_individual(&x, 0).unwrap(), IndividualType::X1);
        let sure_thing = SurfaceParams {
            c_b: 1.0,
            u_max: 0.0,
            ..persuadable.clone()
        };
        let env = static_env(1, sure_thing, 0);
        assert_eq!(env.classify_individual(&x, 0).unwrap(), IndividualType::X3);
        let do_not_disturb = SurfaceParams {
            c_b: 1.0,
            u_max: 1.0,
            u_shift: 1.0,
            c: f64::NEG_INFINITY, // sigmoid 0, u = -1
            ..persuadable.clone()
        };
        let env = static_env(1, do_not_disturb, 0);
        assert_eq!(env.classify_individual(&x, 0).unwrap(), IndividualType::X4);
        let lost_cause = SurfaceParams {
            u_max: 0.0,
            ..persuadable
        };
        let env = static_env(1, lost_cause, 0);
        assert_eq!(env.classify_individual(&x, 0).unwrap(), IndividualType::X2);
    }

    #[test]
    fn deterministic_oracle_treats_only_persuadables() {
        // mixed deterministic environment: persuadable below x = 0.5,
        // sure thing above
        let theta = SurfaceParams {
            w: vec![-1.0],
            c: 0.5,
            k: f64::INFINITY,
            u_max: 1.0,
            u_shift: 0.0,
            w_b: vec![1e6],
            c_b: -0.5e6,
            b_lo: 0.0,
            b_hi: 1.0,
        };
        let env = static_env(1, theta, 0);
        for v in [0.1, 0.3, 0.45, 0.55, 0.8] {
            let x = ContextPoint::new(vec![v]);
            let class = env.classify_individual(&x, 0).unwrap();
            let optimal = env.optimal_action(&x, 0).unwrap();
            assert_eq!(
                optimal == Treatment::Treated,
                class == IndividualType::X1,
                "x = {v}, class {class:?}"
            );
        }
    }

    #[test]
    fn construction_rejects_invalid_surfaces() {
        // b + u exceeds 1
        let theta = SurfaceParams {
            w: vec![0.0, 0.0],
            c: 0.0,
            k: 1.0,
            u_max: 1.6,
            u_shift: 0.0,
            w_b: vec![0.0, 0.0],
            c_b: 0.5,
            b_lo: 0.0,
            b_hi: 1.0,
        };
        let err = Environment::new(EnvironmentSpec {
            dim: 2,
            schedule: DriftSchedule::None { theta },
            reward_spec: RewardSpec::new(1.0, 0.0, 0.0).unwrap(),
            horizon: 100,
            seed: 0,
        });
        assert!(matches!(err, Err(EnvError::SurfaceOutOfRange { .. })));
    }

    #[test]
    fn step_regret_values() {
        assert_eq!(step_regret(Treatment::Treated, Treatment::Treated), 0.0);
        assert_eq!(step_regret(Treatment::Control, Treatment::Treated), 1.0);
    }

    #[test]
    fn oracle_policy_has_zero_trace() {
        let env = static_env(2, flat_surface(2, 0.3, 0.5), 17);
        let env = Environment::new(EnvironmentSpec {
            horizon: 2000,
            ..env.spec().clone()
        })
        .unwrap();
        let mut policy = OraclePolicy::new(env.clone());
        let trace = run_episode(&env, &mut policy, 100).unwrap();
        assert_eq!(trace.len(), 2000);
        assert!(trace.windowed().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let env = static_env(2, flat_surface(2, 0.3, 0.5), 23);
        let env = Environment::new(EnvironmentSpec {
            horizon: 3000,
            ..env.spec().clone()
        })
        .unwrap();
        let t1 = run_episode(&env, &mut RandomPolicy::new(4), 100).unwrap();
        let t2 = run_episode(&env, &mut RandomPolicy::new(4), 100).unwrap();
        assert_eq!(t1.raw(), t2.raw());
        assert_eq!(t1.windowed(), t2.windowed());
    }
}
