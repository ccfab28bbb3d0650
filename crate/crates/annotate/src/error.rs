use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("mesh has no faces to render")]
    EmptyMesh,

    #[error("client config: {0}")]
    Config(String),

    #[error("credential environment variable {var:?} is not set")]
    MissingCredential { var: String },

    #[error("transport failure after {attempts} attempts: {message}")]
    Transport { message: String, attempts: u32 },

    #[error("reply is not a json object: {message}")]
    ReplyNotJson { message: String },

    #[error("reply is malformed: {reason}")]
    BadReply { reason: String },

    #[error("unknown joint type {value:?}")]
    UnknownJointType { value: String },

    #[error("joint axis has zero norm")]
    ZeroAxis,

    #[error("proposal cannot drive joint inference: {reason}")]
    InvalidProposal { reason: String },

    #[error("no mock fixture matches template {template:?}")]
    NoFixture { template: String },

    #[error(transparent)]
    Asset(#[from] r2sim_assets::AssetError),

    #[error("image encoding: {0}")]
    Image(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
