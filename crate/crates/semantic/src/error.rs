use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SemanticError {
    #[error("label table is empty")]
    EmptyLabelTable,

    #[error("zero labeled pixels across {views} supervision views")]
    ZeroLabeledPixels { views: usize },

    #[error("feature dimension mismatch: scene has d={scene}, {what} has d={got}")]
    DimensionMismatch {
        scene: usize,
        got: usize,
        what: String,
    },

    #[error("feature dimension must be at least 2, scene has d={0}")]
    DimensionTooSmall(usize),

    #[error("label {name:?} has non-unit embedding (norm {norm})")]
    NotUnitNorm { name: String, norm: f64 },

    #[error("class {name:?} is not in the label table")]
    UnknownClass { name: String },

    #[error("mask id {id} has no entry in class_ids")]
    UnknownMaskId { id: i32 },

    #[error("mask is {mask_len} pixels but camera is {width}x{height}")]
    MaskShape {
        mask_len: usize,
        width: u32,
        height: u32,
    },

    #[error("invalid training config: {0}")]
    BadConfig(String),

    #[error("mask image {path}: {reason}")]
    MaskImage { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Render(#[from] r2sim_render::RenderError),
}
