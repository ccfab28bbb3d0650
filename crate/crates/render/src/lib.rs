//! Deterministic CPU rasterizer for Gaussian-splat scenes.
//!
//! Splats are projected through a local-affine approximation of the pinhole
//! map (EWA-style), then alpha-composited front to back per pixel. The same
//! forward pass drives an analytic gradient of an L1 photometric loss with
//! respect to a camera-pose increment, which powers photometric alignment.
//!
//! Conventions:
//! - Pixel (ix, iy) samples the continuous image plane at exactly (ix, iy);
//!   a principal point of (W-1)/2 is therefore the geometric image center.
//! - Depth ordering is camera-frame z, ascending, ties broken by splat
//!   index, which makes renders bit-reproducible across thread counts.

mod error;
mod grad;
mod image_io;
mod options;
mod project;
mod raster;
mod sh;

pub use error::RenderError;
pub use grad::{render_with_pose_gradient, PhotometricLoss};
pub use image_io::{
    encode_png_rgb, load_pfm_rgb, load_png_rgb, save_pfm_rgb, save_png_rgb, RgbImage64,
};
pub use options::RenderOptions;
pub use project::{cull_frustum, project_gaussian, Projected2D};
pub use raster::{rasterize, rasterize_with_contributions, PixelContribution, RenderOutput};
pub use sh::{eval_sh, eval_sh_jacobian, sh_color};
