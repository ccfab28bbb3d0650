//! Registration of a Gaussian-splat scene to the simulator frame.
//!
//! Two stages: trimmed ICP between the scene's robot splats and a point
//! cloud sampled from the robot's URDF geometry (world-frame alignment), and
//! photometric gradient descent on the camera pose against a real reference
//! image (camera alignment).

mod camera;
mod cloud;
mod error;
mod icp;
mod kdtree;
mod world;

pub use camera::{align_camera, CamAlignParams};
pub use cloud::{sample_robot_pointcloud, RobotGeometry};
pub use error::RegisterError;
pub use icp::{icp_align, IcpParams, IcpResult};
pub use kdtree::KdTree;
pub use world::{align_world, WorldAlignConfig};
