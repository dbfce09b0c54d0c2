//! The comparison pipeline: an uplift random forest estimating the
//! individual treatment effect, wrapped in an ADWIN change detector that
//! triggers a randomized data-collection period and retraining.

mod adwin;
mod controller;
mod forest;
mod tree;

pub use adwin::{adwin_observe, AdwinDetector};
pub use controller::{ControllerConfig, ControllerState, Phase, PhaseTransition};
pub use forest::{fit_forest, ForestParams, UpliftForest};
pub use tree::{fit_tree, LabeledExample, TreeNode, TreeParams, UpliftTree};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("training data must contain both treatment arms")]
    SingleArmData,
    #[error("training data is empty")]
    EmptyData,
    #[error("forest must have at least one tree")]
    NoTrees,
    #[error("ADWIN input must lie in [0, 1], got {0}")]
    InvalidSignal(f64),
    #[error("ADWIN confidence delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("collection target must be positive")]
    InvalidCollectionTarget,
    #[error("no fitted model available")]
    Unfitted,
}
