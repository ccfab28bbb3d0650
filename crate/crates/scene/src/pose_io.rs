//! JSON interchange for poses and cameras.
//!
//! A pose travels as a 4x4 row-major homogeneous matrix, either nested
//! (`[[..4],[..4],[..4],[..4]]`) or flat (16 numbers); nested is written.

use serde::{Deserialize, Serialize};

use crate::{CameraModel, RigidTransform, SceneError};

pub fn pose_to_json(t: &RigidTransform) -> String {
    let m = t.to_matrix4();
    let rows: Vec<Vec<f64>> = (0..4).map(|r| (0..4).map(|c| m[(r, c)]).collect()).collect();
    serde_json::to_string_pretty(&rows).expect("matrix serializes")
}

pub fn pose_from_json(text: &str) -> Result<RigidTransform, SceneError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| SceneError::InvalidScene(format!("pose JSON: {e}")))?;
    let flat: Vec<f64> = match &value {
        serde_json::Value::Array(rows) if rows.len() == 4 && rows.iter().all(|r| r.is_array()) => {
            let mut out = Vec::with_capacity(16);
            for row in rows {
                let row = row.as_array().unwrap();
                if row.len() != 4 {
                    return Err(SceneError::InvalidScene(format!(
                        "pose JSON: row has {} entries, expected 4",
                        row.len()
                    )));
                }
                for v in row {
                    out.push(v.as_f64().ok_or_else(|| {
                        SceneError::InvalidScene("pose JSON: non-numeric entry".into())
                    })?);
                }
            }
            out
        }
        serde_json::Value::Array(vals) if vals.len() == 16 => vals
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| SceneError::InvalidScene("pose JSON: non-numeric entry".into()))
            })
            .collect::<Result<_, _>>()?,
        _ => {
            return Err(SceneError::InvalidScene(
                "pose JSON: expected a 4x4 nested array or 16 numbers".into(),
            ))
        }
    };

    let mut m = nalgebra::Matrix4::<f64>::zeros();
    for r in 0..4 {
        for c in 0..4 {
            m[(r, c)] = flat[r * 4 + c];
        }
    }
    let bottom_ok = (m[(3, 0)], m[(3, 1)], m[(3, 2)], m[(3, 3)]) == (0.0, 0.0, 0.0, 1.0);
    if !bottom_ok {
        return Err(SceneError::InvalidScene(
            "pose JSON: bottom row must be [0, 0, 0, 1]".into(),
        ));
    }
    let t = RigidTransform::from_matrix4(&m);
    t.validate()?;
    Ok(t)
}

/// Serde image of a [`CameraModel`]: intrinsics plus the world-to-camera
/// pose as a row-major 4x4 matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraJson {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub world_to_camera: Vec<Vec<f64>>,
}

pub fn camera_to_json(cam: &CameraModel) -> String {
    let m = cam.world_to_camera.to_matrix4();
    let rows = (0..4).map(|r| (0..4).map(|c| m[(r, c)]).collect()).collect();
    let img = CameraJson {
        fx: cam.fx,
        fy: cam.fy,
        cx: cam.cx,
        cy: cam.cy,
        width: cam.width,
        height: cam.height,
        world_to_camera: rows,
    };
    serde_json::to_string_pretty(&img).expect("camera serializes")
}

pub fn camera_from_json(text: &str) -> Result<CameraModel, SceneError> {
    let img: CameraJson = serde_json::from_str(text)
        .map_err(|e| SceneError::InvalidScene(format!("camera JSON: {e}")))?;
    let pose_text = serde_json::to_string(&img.world_to_camera).expect("rows serialize");
    let cam = CameraModel {
        fx: img.fx,
        fy: img.fy,
        cx: img.cx,
        cy: img.cy,
        width: img.width,
        height: img.height,
        world_to_camera: pose_from_json(&pose_text)?,
    };
    cam.validate()?;
    Ok(cam)
}
