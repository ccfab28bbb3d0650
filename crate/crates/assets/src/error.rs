use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    ObjParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid mesh: {reason}")]
    InvalidMesh { reason: String },

    #[error("mesh is not watertight: {reason}")]
    NotWatertight { reason: String },

    #[error("mesh carries no face labels")]
    MissingFaceLabels,

    #[error("no faces carry label {label:?}")]
    EmptyLabel { label: String },

    #[error("{field} = {value} outside ({min}, {max})")]
    PhysicsRange {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid articulation: {reason}")]
    InvalidArticulation { reason: String },

    #[error("invalid asset: {reason}")]
    InvalidAsset { reason: String },

    #[error("link name {name:?} is reserved")]
    ReservedName { name: String },

    #[error("link {link:?} has non-finite inertial data")]
    NonFiniteInertia { link: String },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> AssetError {
    AssetError::Io {
        path: path.into(),
        source,
    }
}
