use thiserror::Error;

/// Errors raised by scene construction and the splat PLY parser/serializer.
#[derive(Debug, Error)]
pub enum SceneError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed PLY header: {0}")]
    MalformedHeader(String),

    #[error("PLY header is missing required property `{0}`")]
    MissingProperty(String),

    #[error("PLY declares {count} `f_rest_*` properties, which matches no spherical-harmonic degree in 0..=3")]
    InconsistentShProperties { count: usize },

    #[error("non-finite value in vertex {vertex}, property `{property}`")]
    NonFinite { vertex: usize, property: String },

    #[error("vertex {vertex} has a near-zero quaternion; cannot normalize")]
    DegenerateQuaternion { vertex: usize },

    #[error("splat {index}: {reason}")]
    InvalidSplat { index: usize, reason: String },

    #[error("scene is inconsistent: {0}")]
    InvalidScene(String),

    #[error("label table entry `{class}`: {reason}")]
    InvalidLabel { class: String, reason: String },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("rotation matrix is not in SO(3): {0}")]
    NotARotation(String),
}

impl SceneError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        SceneError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn json(path: &std::path::Path, source: serde_json::Error) -> Self {
        SceneError::Json {
            path: path.display().to_string(),
            source,
        }
    }
}
