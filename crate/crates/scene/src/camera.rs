use nalgebra::{Vector2, Vector3};

use crate::{RigidTransform, SceneError};

/// Pinhole camera: intrinsics in pixels plus the world-to-camera pose.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub world_to_camera: RigidTransform,
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(SceneError::InvalidScene(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if self.cx < 0.0 || self.cx >= self.width as f64 {
            return Err(SceneError::InvalidScene(format!(
                "cx={} outside [0, {})",
                self.cx, self.width
            )));
        }
        if self.cy < 0.0 || self.cy >= self.height as f64 {
            return Err(SceneError::InvalidScene(format!(
                "cy={} outside [0, {})",
                self.cy, self.height
            )));
        }
        self.world_to_camera.validate()
    }

    /// World point → camera frame.
    pub fn to_camera(&self, p_world: &Vector3<f64>) -> Vector3<f64> {
        self.world_to_camera.apply(p_world)
    }

    /// Camera-frame point → pixel coordinates (perspective divide).
    pub fn project_camera_point(&self, p_cam: &Vector3<f64>) -> Vector2<f64> {
        Vector2::new(
            self.fx * p_cam[0] / p_cam[2] + self.cx,
            self.fy * p_cam[1] / p_cam[2] + self.cy,
        )
    }

    /// Camera origin expressed in world coordinates.
    pub fn center_in_world(&self) -> Vector3<f64> {
        self.world_to_camera.inverse().translation
    }

    /// The same camera at half resolution (box-filter pyramid convention):
    /// focal lengths and principal point scale with the image.
    pub fn halved(&self) -> CameraModel {
        CameraModel {
            fx: self.fx * 0.5,
            fy: self.fy * 0.5,
            cx: (self.cx + 0.5) * 0.5 - 0.5,
            cy: (self.cy + 0.5) * 0.5 - 0.5,
            width: (self.width / 2).max(1),
            height: (self.height / 2).max(1),
            world_to_camera: self.world_to_camera,
        }
    }
}
