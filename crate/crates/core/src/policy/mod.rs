//! Theorem-prediction policy: state features, a linear softmax scorer over
//! branch-actions, supervised and policy-gradient training, and top-k
//! hit-rate evaluation.

mod features;
mod model;
mod train;

pub use features::{feature_dim, featurize, featurize_with_legal, FeatureVector};
pub use model::{mask_normalize, softmax, Gradient, PolicyModel};
pub use train::{
    cross_entropy, policy_gradient, reinforce_update, topk_hit_rate, train_supervised, EpochLoss, Experience,
    TrainConfig, Trajectory, TrajectoryStep,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("feature dimension mismatch: model expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no legal actions to normalize over")]
    EmptyLegalSet,
    #[error("experience pool is empty")]
    EmptyPool,
}
