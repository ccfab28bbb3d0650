//! Naive O(N * H * W) reference renderer.
//!
//! Everything is re-derived here rather than shared with the production
//! rasterizer: quaternion-to-matrix conversion, the world covariance, the
//! perspective Jacobian, spherical harmonics, and the blending loop. The
//! semantics under test: per pixel, splats sorted by camera-frame depth
//! (ties by index) composite front to back with
//! alpha_i = sigmoid(opacity) * exp(-q/2), q = d^T (Sigma')^-1 d, a 3-sigma
//! cutoff (q > 9 skipped), low-pass-regularized Sigma', and early
//! termination once transmittance falls below epsilon_t.

use nalgebra::{Matrix2, Matrix3, Vector3};
use r2sim_scene::{CameraModel, GaussianScene};
use r2sim_render::RenderOptions;

const SH_C0: f64 = 0.28209479177387814;
const SH_C1: f64 = 0.4886025119029199;
const SH_C2: [f64; 5] = [
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
];
const SH_C3: [f64; 7] = [
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.445305721320277,
    -0.5900435899266435,
];

/// Textbook quaternion (w,x,y,z) to rotation matrix.
fn quat_to_matrix(q: &[f64; 4]) -> Matrix3<f64> {
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

fn sh_eval(degree: usize, coeffs: &[[f64; 3]], d: &Vector3<f64>) -> [f64; 3] {
    let (x, y, z) = (d[0], d[1], d[2]);
    let mut out = [0.0; 3];
    for ch in 0..3 {
        let mut v = SH_C0 * coeffs[0][ch];
        if degree >= 1 {
            v += -SH_C1 * y * coeffs[1][ch] + SH_C1 * z * coeffs[2][ch] - SH_C1 * x * coeffs[3][ch];
        }
        if degree >= 2 {
            let (xx, yy, zz) = (x * x, y * y, z * z);
            v += SH_C2[0] * x * y * coeffs[4][ch]
                + SH_C2[1] * y * z * coeffs[5][ch]
                + SH_C2[2] * (2.0 * zz - xx - yy) * coeffs[6][ch]
                + SH_C2[3] * x * z * coeffs[7][ch]
                + SH_C2[4] * (xx - yy) * coeffs[8][ch];
            if degree >= 3 {
                v += SH_C3[0] * y * (3.0 * xx - yy) * coeffs[9][ch]
                    + SH_C3[1] * x * y * z * coeffs[10][ch]
                    + SH_C3[2] * y * (4.0 * zz - xx - yy) * coeffs[11][ch]
                    + SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * coeffs[12][ch]
                    + SH_C3[4] * x * (4.0 * zz - xx - yy) * coeffs[13][ch]
                    + SH_C3[5] * z * (xx - yy) * coeffs[14][ch]
                    + SH_C3[6] * x * (xx - 3.0 * yy) * coeffs[15][ch];
            }
        }
        out[ch] = (v + 0.5).clamp(0.0, 1.0);
    }
    out
}

struct NaiveSplat {
    mean: [f64; 2],
    inv_cov: Matrix2<f64>,
    color: [f64; 3],
    opacity: f64,
    depth: f64,
    index: usize,
}

/// Renders color and alpha with the naive algorithm. Buffers are row-major,
/// H*W*3 and H*W.
pub fn naive_render(
    scene: &GaussianScene,
    camera: &CameraModel,
    opts: &RenderOptions,
) -> (Vec<f64>, Vec<f64>) {
    let r = &camera.world_to_camera.rotation;
    let t = &camera.world_to_camera.translation;
    let cam_center = -(r.transpose() * t);

    let mut visible: Vec<NaiveSplat> = Vec::new();
    for (i, s) in scene.splats.iter().enumerate() {
        let p_cam = r * s.position + t;
        let z = p_cam[2];
        if z <= opts.near || z >= opts.far {
            continue;
        }
        let u = camera.fx * p_cam[0] / z + camera.cx;
        let v = camera.fy * p_cam[1] / z + camera.cy;

        let rq = quat_to_matrix(&s.rotation);
        let scales = Matrix3::from_diagonal(&Vector3::new(
            s.log_scale[0].exp().powi(2),
            s.log_scale[1].exp().powi(2),
            s.log_scale[2].exp().powi(2),
        ));
        let sigma_world = rq * scales * rq.transpose();
        let sigma_cam = r * sigma_world * r.transpose();

        let j = nalgebra::Matrix2x3::new(
            camera.fx / z,
            0.0,
            -camera.fx * p_cam[0] / (z * z),
            0.0,
            camera.fy / z,
            -camera.fy * p_cam[1] / (z * z),
        );
        let mut cov2d = j * sigma_cam * j.transpose();
        cov2d[(0, 0)] += opts.lambda_lowpass;
        cov2d[(1, 1)] += opts.lambda_lowpass;
        let det = cov2d[(0, 0)] * cov2d[(1, 1)] - cov2d[(0, 1)] * cov2d[(1, 0)];
        if !(det > 0.0) {
            continue;
        }
        let inv_cov = Matrix2::new(
            cov2d[(1, 1)] / det,
            -cov2d[(0, 1)] / det,
            -cov2d[(1, 0)] / det,
            cov2d[(0, 0)] / det,
        );

        let dir = (s.position - cam_center).normalize();
        visible.push(NaiveSplat {
            mean: [u, v],
            inv_cov,
            color: sh_eval(scene.sh_degree, &s.sh_coeffs, &dir),
            opacity: 1.0 / (1.0 + (-s.opacity_logit).exp()),
            depth: z,
            index: i,
        });
    }
    visible.sort_by(|a, b| {
        a.depth
            .partial_cmp(&b.depth)
            .unwrap()
            .then(a.index.cmp(&b.index))
    });

    let (w, h) = (camera.width as usize, camera.height as usize);
    let mut color = vec![0.0f64; w * h * 3];
    let mut alpha = vec![0.0f64; w * h];
    for py in 0..h {
        for px in 0..w {
            let mut transmittance = 1.0f64;
            let mut rgb = [0.0f64; 3];
            for s in &visible {
                let dx = px as f64 - s.mean[0];
                let dy = py as f64 - s.mean[1];
                let q = s.inv_cov[(0, 0)] * dx * dx
                    + (s.inv_cov[(0, 1)] + s.inv_cov[(1, 0)]) * dx * dy
                    + s.inv_cov[(1, 1)] * dy * dy;
                if q > 9.0 {
                    continue;
                }
                let a = s.opacity * (-0.5 * q).exp();
                for ch in 0..3 {
                    rgb[ch] += transmittance * a * s.color[ch];
                }
                transmittance *= 1.0 - a;
                if transmittance < opts.epsilon_t {
                    break;
                }
            }
            let o = (py * w + px) * 3;
            for ch in 0..3 {
                color[o + ch] = rgb[ch] + opts.background[ch] * transmittance;
            }
            alpha[py * w + px] = 1.0 - transmittance;
        }
    }
    (color, alpha)
}
