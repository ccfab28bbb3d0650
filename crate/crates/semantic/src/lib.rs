//! Semantic feature fields over Gaussian scenes: contrastive training of
//! per-splat embeddings against 2D class masks, plus mask queries and
//! class-driven splat extraction for downstream registration.

mod error;
mod query;
mod train;
mod view;

pub use error::SemanticError;
pub use query::{extract_splats_by_class, query_mask};
pub use train::{
    evaluate_loss, evaluate_loss_with_temperature, train_features, FeatureTrainConfig,
};
pub use view::{load_mask, save_mask, SupervisionView, UNLABELED};
