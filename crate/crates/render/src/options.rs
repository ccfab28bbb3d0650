use serde::{Deserialize, Serialize};

/// Rasterization parameters. The defaults are the values used throughout the
/// pipeline; tests that compare renderers must share one `RenderOptions`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderOptions {
    /// Background color composited behind the splats, linear [0,1].
    pub background: [f64; 3],
    /// Early-termination transmittance: blending stops once the remaining
    /// transmittance drops below this.
    pub epsilon_t: f64,
    /// Low-pass regularizer added to both diagonal entries of every
    /// projected covariance, in pixels^2. Keeps sub-pixel splats visible.
    pub lambda_lowpass: f64,
    /// Near clipping depth, meters. Splats at or in front of it are culled.
    pub near: f64,
    /// Far clipping depth, meters.
    pub far: f64,
    /// Also accumulate the per-pixel feature map (requires feature_dim > 0).
    pub render_features: bool,
    /// Side length of a rasterization tile, pixels.
    pub tile_size: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            background: [0.0, 0.0, 0.0],
            epsilon_t: 1e-4,
            lambda_lowpass: 0.3,
            near: 0.01,
            far: 1000.0,
            render_features: false,
            tile_size: 16,
        }
    }
}
