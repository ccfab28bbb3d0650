//! Core domain types for Gaussian-splat scenes: splats, rigid transforms,
//! pinhole cameras, and the binary splat PLY interchange format.
//!
//! Scenes are immutable after construction; operations that change a scene
//! (`transform_scene`, feature training downstream) return a new one.

mod camera;
mod error;
mod labels;
mod ply;
mod pose_io;
mod splat;
mod transform;

pub use camera::CameraModel;
pub use error::SceneError;
pub use labels::{load_label_table, save_label_table};
pub use ply::{load_splat_ply, load_splat_ply_with_feature_dim, save_splat_ply};
pub use pose_io::{camera_from_json, camera_to_json, pose_from_json, pose_to_json, CameraJson};
pub use splat::{transform_scene, GaussianScene, GaussianSplat, ShRotation};
pub use labels::validate_label_table;
pub use transform::{rotation_log, RigidTransform};

/// Shared tolerance for "is this rotation matrix in SO(3)" checks.
pub const SO3_TOL: f64 = 1e-8;
