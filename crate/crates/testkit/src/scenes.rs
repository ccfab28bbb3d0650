use nalgebra::{Matrix3, Vector3};
use r2sim_scene::{CameraModel, GaussianScene, GaussianSplat, RigidTransform};

use crate::TestRng;

/// Shape of a generated random scene.
#[derive(Debug, Clone)]
pub struct RandomSceneSpec {
    pub splats: usize,
    pub sh_degree: usize,
    pub feature_dim: usize,
    /// Splat centers are drawn uniformly in this axis-aligned box.
    pub center: Vector3<f64>,
    pub half_extent: Vector3<f64>,
    /// log-scale range per axis.
    pub log_scale_range: (f64, f64),
    pub opacity_logit_range: (f64, f64),
}

impl Default for RandomSceneSpec {
    fn default() -> Self {
        RandomSceneSpec {
            splats: 100,
            sh_degree: 1,
            feature_dim: 0,
            center: Vector3::new(0.0, 0.0, 1.5),
            half_extent: Vector3::new(0.5, 0.5, 0.7),
            log_scale_range: (-4.2, -2.3),
            opacity_logit_range: (-1.0, 2.5),
        }
    }
}

pub fn random_scene(spec: &RandomSceneSpec, rng: &mut TestRng) -> GaussianScene {
    let mut splats = Vec::with_capacity(spec.splats);
    for _ in 0..spec.splats {
        let mut s = GaussianSplat::zeroed(spec.sh_degree, spec.feature_dim);
        for a in 0..3 {
            s.position[a] =
                spec.center[a] + rng.range(-spec.half_extent[a], spec.half_extent[a]);
        }
        let q = [
            rng.range(-1.0, 1.0) + 1.5,
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
        ];
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        for a in 0..4 {
            s.rotation[a] = q[a] / n;
        }
        for a in 0..3 {
            s.log_scale[a] = rng.range(spec.log_scale_range.0, spec.log_scale_range.1);
        }
        s.opacity_logit = rng.range(spec.opacity_logit_range.0, spec.opacity_logit_range.1);
        for c in &mut s.sh_coeffs {
            for ch in 0..3 {
                c[ch] = rng.range(-0.4, 0.4);
            }
        }
        for f in &mut s.feature {
            *f = rng.range(-1.0, 1.0);
        }
        splats.push(s);
    }
    GaussianScene::new(splats, spec.sh_degree, spec.feature_dim)
}

/// World-to-camera pose looking from `eye` toward `target`; image x points
/// right and image y points down relative to `up`.
pub fn look_at_camera(
    eye: Vector3<f64>,
    target: Vector3<f64>,
    up: Vector3<f64>,
    fx: f64,
    width: u32,
    height: u32,
) -> CameraModel {
    let z = (target - eye).normalize();
    let x = z.cross(&up).normalize();
    let y = z.cross(&x);
    let rotation = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    let translation = -rotation * eye;
    CameraModel {
        fx,
        fy: fx,
        cx: (width as f64 - 1.0) / 2.0,
        cy: (height as f64 - 1.0) / 2.0,
        width,
        height,
        world_to_camera: RigidTransform::new(rotation, translation),
    }
}

/// Camera at a random orbit position looking at `target`.
pub fn random_camera_near(
    target: Vector3<f64>,
    distance_range: (f64, f64),
    width: u32,
    height: u32,
    rng: &mut TestRng,
) -> CameraModel {
    let radius = rng.range(distance_range.0, distance_range.1);
    let azimuth = rng.range(0.0, std::f64::consts::TAU);
    // Stay away from the poles so the up vector is never degenerate.
    let elevation = rng.range(-0.9, 0.9);
    let dir = Vector3::new(
        azimuth.cos() * elevation.cos(),
        azimuth.sin() * elevation.cos(),
        elevation.sin(),
    );
    let eye = target - radius * dir;
    look_at_camera(
        eye,
        target,
        Vector3::z(),
        rng.range(50.0, 90.0),
        width,
        height,
    )
}

/// Random rigid transform with rotation angle up to `max_angle_rad` and
/// translation norm up to `max_translation`.
pub fn random_rigid(max_angle_rad: f64, max_translation: f64, rng: &mut TestRng) -> RigidTransform {
    let mut axis = Vector3::new(rng.normal(), rng.normal(), rng.normal());
    if axis.norm() < 1e-9 {
        axis = Vector3::x();
    }
    axis = axis.normalize();
    let angle = rng.range(0.0, max_angle_rad);
    let mut t = Vector3::new(rng.normal(), rng.normal(), rng.normal());
    if t.norm() > 1e-12 {
        t = t.normalize() * rng.range(0.0, max_translation);
    }
    let rotation = RigidTransform::from_axis_angle(&axis, angle).rotation;
    RigidTransform::new(rotation, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn look_at_points_camera_at_target() {
        let cam = look_at_camera(
            Vector3::new(2.0, 1.0, 1.5),
            Vector3::new(0.0, 0.0, 0.5),
            Vector3::z(),
            80.0,
            64,
            48,
        );
        cam.validate().unwrap();
        let p = cam.to_camera(&Vector3::new(0.0, 0.0, 0.5));
        // Target lies on the optical axis, in front of the camera.
        assert!(p[0].abs() < 1e-12);
        assert!(p[1].abs() < 1e-12);
        assert!(p[2] > 0.0);
    }

    #[test]
    fn random_rigid_respects_bounds() {
        let mut rng = TestRng::new(5);
        for _ in 0..50 {
            let t = random_rigid(0.3, 0.1, &mut rng);
            t.validate().unwrap();
            assert!(t.translation.norm() <= 0.1 + 1e-12);
            let angle = r2sim_scene::rotation_log(&t.rotation).norm();
            assert!(angle <= 0.3 + 1e-9);
        }
    }
}
