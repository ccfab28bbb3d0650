use nalgebra::{Matrix2, Matrix2x3, Matrix3, Vector2, Vector3};
use r2sim_scene::{CameraModel, GaussianScene, GaussianSplat};

/// A splat after projection: 2D mean and covariance in pixel units plus the
/// camera-frame depth used for sorting.
#[derive(Debug, Clone)]
pub struct Projected2D {
    pub mean2d: Vector2<f64>,
    /// The projected covariance including the low-pass term; positive
    /// definite by construction.
    pub cov2d: Matrix2<f64>,
    /// Camera-frame z, meters.
    pub depth: f64,
    pub splat_index: usize,
}

impl Projected2D {
    /// Radius containing the 3-sigma ellipse: 3 * sqrt(largest eigenvalue).
    pub fn radius3(&self) -> f64 {
        let mid = 0.5 * (self.cov2d[(0, 0)] + self.cov2d[(1, 1)]);
        let det = self.cov2d[(0, 0)] * self.cov2d[(1, 1)] - self.cov2d[(0, 1)] * self.cov2d[(1, 0)];
        let lambda_max = mid + (mid * mid - det).max(0.0).sqrt();
        3.0 * lambda_max.max(0.0).sqrt()
    }
}

/// Jacobian of the pinhole map at camera-frame point `p`.
pub(crate) fn perspective_jacobian(cam: &CameraModel, p: &Vector3<f64>) -> Matrix2x3<f64> {
    let (x, y, z) = (p[0], p[1], p[2]);
    Matrix2x3::new(
        cam.fx / z,
        0.0,
        -cam.fx * x / (z * z),
        0.0,
        cam.fy / z,
        -cam.fy * y / (z * z),
    )
}

/// Projects one splat. Returns `None` when the camera-frame depth is at or
/// behind the near plane (a cull-required condition, not an error).
pub fn project_gaussian(
    splat: &GaussianSplat,
    index: usize,
    camera: &CameraModel,
    lambda_lowpass: f64,
    near: f64,
) -> Option<Projected2D> {
    let p_cam = camera.to_camera(&splat.position);
    if p_cam[2] <= near {
        return None;
    }
    let j = perspective_jacobian(camera, &p_cam);
    let r_w: &Matrix3<f64> = &camera.world_to_camera.rotation;
    let sigma_cam = r_w * splat.covariance3d() * r_w.transpose();
    let mut cov2d = j * sigma_cam * j.transpose();
    cov2d[(0, 0)] += lambda_lowpass;
    cov2d[(1, 1)] += lambda_lowpass;
    Some(Projected2D {
        mean2d: camera.project_camera_point(&p_cam),
        cov2d,
        depth: p_cam[2],
        splat_index: index,
    })
}

/// Indices of splats whose projected mean lies inside the image rectangle
/// dilated by `margin` times the 3-sigma extent, with depth in (near, far).
pub fn cull_frustum(
    scene: &GaussianScene,
    camera: &CameraModel,
    margin: f64,
    lambda_lowpass: f64,
    near: f64,
    far: f64,
) -> Vec<usize> {
    let mut keep = Vec::new();
    for (i, splat) in scene.splats.iter().enumerate() {
        let Some(proj) = project_gaussian(splat, i, camera, lambda_lowpass, near) else {
            continue;
        };
        if proj.depth >= far {
            continue;
        }
        let dilation = margin * proj.radius3();
        let (u, v) = (proj.mean2d[0], proj.mean2d[1]);
        let inside = u >= -dilation
            && u <= camera.width as f64 - 1.0 + dilation
            && v >= -dilation
            && v <= camera.height as f64 - 1.0 + dilation;
        if inside {
            keep.push(i);
        }
    }
    keep
}
