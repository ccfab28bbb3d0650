use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("image dimensions must be nonzero, got {width}x{height}")]
    ZeroImageDims { width: u32, height: u32 },

    #[error("feature rendering requested but the scene has feature_dim = 0")]
    FeatureDimZero,

    #[error("dimension mismatch: camera is {cam_w}x{cam_h}, image is {img_w}x{img_h}")]
    DimensionMismatch {
        cam_w: u32,
        cam_h: u32,
        img_w: usize,
        img_h: usize,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {message}")]
    Codec { path: String, message: String },

    #[error(transparent)]
    Scene(#[from] r2sim_scene::SceneError),
}

impl RenderError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        RenderError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn codec(path: &std::path::Path, message: impl Into<String>) -> Self {
        RenderError::Codec {
            path: path.display().to_string(),
            message: message.into(),
        }
    }
}
