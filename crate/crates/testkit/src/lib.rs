//! Test support: independent oracles and deterministic fixture generators.
//!
//! Nothing here is used by the pipeline itself. The naive renderer
//! deliberately re-derives projection and blending from first principles so
//! the tile rasterizer is checked against a second implementation rather
//! than against itself.

mod naive;
mod rng;
mod scenes;

pub use naive::naive_render;
pub use rng::TestRng;
pub use scenes::{look_at_camera, random_camera_near, random_rigid, random_scene, RandomSceneSpec};
