//! World-frame alignment: extract the robot's splats by semantic class,
//! register them against a point cloud sampled from the robot's URDF
//! geometry, and carry the whole scene into the simulator frame.

use r2sim_kinematics::JointConfig;
use r2sim_scene::{transform_scene, GaussianScene, RigidTransform, ShRotation};
use r2sim_semantic::extract_splats_by_class;
use serde::{Deserialize, Serialize};

use crate::cloud::{sample_robot_pointcloud, RobotGeometry};
use crate::error::RegisterError;
use crate::icp::{icp_align, IcpParams, IcpResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldAlignConfig {
    /// Semantic class naming the robot in the scene's label table.
    pub robot_class: String,
    /// Cosine threshold for robot-splat extraction.
    pub feature_threshold: f64,
    /// Number of surface samples drawn from the URDF geometry.
    pub cloud_points: usize,
    /// Seed for the URDF surface sampling.
    pub seed: u64,
    pub icp: IcpParams,
}

impl Default for WorldAlignConfig {
    fn default() -> Self {
        WorldAlignConfig {
            robot_class: "a robot arm".to_string(),
            feature_threshold: 0.25,
            cloud_points: 2000,
            seed: 0,
            icp: IcpParams::default(),
        }
    }
}

impl WorldAlignConfig {
    pub fn validate(&self) -> Result<(), RegisterError> {
        if self.robot_class.is_empty() {
            return Err(RegisterError::BadParams("robot_class is empty".into()));
        }
        if !self.feature_threshold.is_finite() {
            return Err(RegisterError::BadParams(format!(
                "feature_threshold = {} is not finite",
                self.feature_threshold
            )));
        }
        if self.cloud_points < 3 {
            return Err(RegisterError::BadParams(format!(
                "cloud_points = {} cannot support registration, need at least 3",
                self.cloud_points
            )));
        }
        self.icp.validate()
    }
}

/// Registers `scene` to the robot's URDF frame and returns the transformed
/// scene together with the ICP report. The returned transform maps scene
/// coordinates into the robot frame.
pub fn align_world(
    scene: &GaussianScene,
    robot: &RobotGeometry,
    q_default: &JointConfig,
    cfg: &WorldAlignConfig,
) -> Result<(GaussianScene, IcpResult), RegisterError> {
    cfg.validate()?;
    let (indices, positions) =
        extract_splats_by_class(scene, &cfg.robot_class, cfg.feature_threshold)?;
    if positions.is_empty() {
        return Err(RegisterError::EmptyExtraction {
            class: cfg.robot_class.clone(),
            threshold: cfg.feature_threshold,
        });
    }
    log::info!(
        "world alignment: {} robot splats of {} total",
        indices.len(),
        scene.splats.len()
    );
    let anchor = sample_robot_pointcloud(robot, q_default, cfg.cloud_points, cfg.seed)?;
    let result = icp_align(&positions, &anchor, &RigidTransform::identity(), &cfg.icp)?;
    let aligned = transform_scene(scene, &result.transform, ShRotation::KeepUnrotated);
    Ok((aligned, result))
}
