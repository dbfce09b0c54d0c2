//! Uplifted contextual multi-armed bandits (U-CMAB).
//!
//! Bandit agents that optimize the individual treatment effect through a
//! penalty-derived uplift threshold, together with:
//!
//! * drift-capable simulated environments with an exact causal oracle,
//! * an uplift-random-forest baseline wrapped in ADWIN change detection
//!   with a collect/retrain loop,
//! * qini-curve and causal-regret evaluation,
//! * a reproducible experiment runner (`ucmab` binary).
//!
//! The key identity: with per-arm penalties `(psi_0, psi_1)` and response
//! reward `R`, greedily maximizing the penalized expected reward
//! `R * p_i - psi_i` makes the same decisions as thresholding the uplift
//! `p_1 - p_0` at `tau = (psi_1 - psi_0) / R`.

pub mod bandits;
pub mod config;
pub mod core;
pub mod eval;
pub mod hillstrom;
pub mod runner;
pub mod simenv;
pub mod uplift_baseline;

pub use crate::core::{
    compute_threshold, penalized_expected_reward, select_by_argmax, select_by_threshold, uplift,
    ContextPoint, Outcome, RewardSpec, Treatment,
};
