use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegisterError {
    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("{which} cloud has {got} points, need at least 3")]
    TooFewPoints { which: &'static str, got: usize },

    #[error("iteration {iteration}: only {surviving} correspondences survive the cutoff and trimming, need at least 3")]
    FewCorrespondences { surviving: usize, iteration: usize },

    #[error("iteration {iteration}: cross-covariance rank < 2, correspondence geometry is degenerate")]
    DegenerateCovariance { iteration: usize },

    #[error("robot has no collision geometry")]
    NoGeometry,

    #[error("link {link:?} references collision mesh {path} but no mesh was provided")]
    MissingMesh { link: String, path: PathBuf },

    #[error("no splats matched class {class:?} at threshold {threshold}")]
    EmptyExtraction { class: String, threshold: f64 },

    #[error("non-finite photometric loss at level {level}, iteration {iteration}")]
    NonFiniteLoss { level: usize, iteration: usize },

    #[error(transparent)]
    Scene(#[from] r2sim_scene::SceneError),

    #[error(transparent)]
    Render(#[from] r2sim_render::RenderError),

    #[error(transparent)]
    Semantic(#[from] r2sim_semantic::SemanticError),

    #[error(transparent)]
    Kinematics(#[from] r2sim_kinematics::KinematicsError),

    #[error(transparent)]
    Asset(#[from] r2sim_assets::AssetError),
}
