//! Analytic gradient of the photometric loss with respect to a camera-pose
//! increment.
//!
//! The pose is perturbed on the right: T(xi) = world_to_camera . exp(xi),
//! xi = [rho; omega] with translation first. The gradient chains from the
//! per-pixel L1 loss through alpha blending, the projected mean and
//! covariance (including the Jacobian's own dependence on the camera-frame
//! point), and the SH view direction.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3, Vector6};
use r2sim_scene::{CameraModel, GaussianScene};
use rayon::prelude::*;

use crate::raster::{build_tile_lists, falloff_q, prepare_splats, view_direction};
use crate::sh::{eval_sh, eval_sh_jacobian};
use crate::{RenderError, RenderOptions, RgbImage64};

/// Pixel-wise photometric objective, averaged over all channels and pixels.
/// L1 is the reconstruction error the pipeline reports; L2 is smooth at zero
/// residual, which makes it the better surrogate for final pose polishing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotometricLoss {
    L1,
    L2,
}

/// Per-splat adjoint accumulated over pixels: gradients of the loss with
/// respect to mean2d, cov2d (symmetric), and the blended color.
#[derive(Clone, Copy)]
struct Adjoint {
    mean: Vector2<f64>,
    cov: Matrix2<f64>,
    color: Vector3<f64>,
}

impl Adjoint {
    fn zero() -> Self {
        Adjoint {
            mean: Vector2::zeros(),
            cov: Matrix2::zeros(),
            color: Vector3::zeros(),
        }
    }
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

fn l1_sign(diff: f64) -> f64 {
    if diff > 0.0 {
        1.0
    } else if diff < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn render_with_pose_gradient(
    scene: &GaussianScene,
    camera: &CameraModel,
    reference: &RgbImage64,
    loss: PhotometricLoss,
    opts: &RenderOptions,
) -> Result<(f64, Vector6<f64>), RenderError> {
    camera.validate()?;
    let (w, h) = (camera.width as usize, camera.height as usize);
    if w == 0 || h == 0 {
        return Err(RenderError::ZeroImageDims {
            width: camera.width,
            height: camera.height,
        });
    }
    if reference.width != w || reference.height != h {
        return Err(RenderError::DimensionMismatch {
            cam_w: camera.width,
            cam_h: camera.height,
            img_w: reference.width,
            img_h: reference.height,
        });
    }

    let prepared = prepare_splats(scene, camera, opts);
    let ts = opts.tile_size.max(1);
    let tiles_x = w.div_ceil(ts);
    let tiles_y = h.div_ceil(ts);
    let tile_lists = build_tile_lists(&prepared, tiles_x, tiles_y, ts);
    let pixel_norm = 1.0 / (3.0 * (w * h) as f64);

    struct TileResult {
        loss_sum: f64,
        adjoints: Vec<Adjoint>,
    }

    let run_tile = |tile_idx: usize| -> TileResult {
        let (tx, ty) = (tile_idx % tiles_x, tile_idx / tiles_x);
        let px0 = tx * ts;
        let py0 = ty * ts;
        let pw = ts.min(w - px0);
        let ph = ts.min(h - py0);
        let list = &tile_lists[tile_idx];
        let mut adjoints = vec![Adjoint::zero(); prepared.len()];
        let mut loss_sum = 0.0f64;
        // Forward stack per pixel: (prepared index, alpha, transmittance
        // before this splat).
        let mut stack: Vec<(u32, f64, f64)> = Vec::with_capacity(64);

        for ly in 0..ph {
            for lx in 0..pw {
                let gx = px0 + lx;
                let gy = py0 + ly;
                let (px, py) = (gx as f64, gy as f64);
                stack.clear();

                let mut transmittance = 1.0f64;
                let mut rgb = [0.0f64; 3];
                for &k in list {
                    let p = &prepared[k as usize];
                    let q = falloff_q(p, px, py);
                    if q > 9.0 {
                        continue;
                    }
                    let alpha = p.base_alpha * (-0.5 * q).exp();
                    let weight = alpha * transmittance;
                    for ch in 0..3 {
                        rgb[ch] += weight * p.color[ch];
                    }
                    stack.push((k, alpha, transmittance));
                    transmittance *= 1.0 - alpha;
                    if transmittance < opts.epsilon_t {
                        break;
                    }
                }

                let refpx = reference.pixel(gx, gy);
                let mut out = [0.0f64; 3];
                let mut gout = [0.0f64; 3];
                for ch in 0..3 {
                    out[ch] = rgb[ch] + opts.background[ch] * transmittance;
                    let diff = out[ch] - refpx[ch];
                    match loss {
                        PhotometricLoss::L1 => {
                            loss_sum += diff.abs();
                            gout[ch] = l1_sign(diff) * pixel_norm;
                        }
                        PhotometricLoss::L2 => {
                            loss_sum += diff * diff;
                            gout[ch] = 2.0 * diff * pixel_norm;
                        }
                    }
                }

                // Backward: suffix S_i = out - prefix_i includes the
                // background term, so d(out)/d(alpha_i) =
                // c_i T_i - S_i / (1 - alpha_i) covers it as well.
                let mut prefix = [0.0f64; 3];
                for &(k, alpha, t_before) in &stack {
                    let p = &prepared[k as usize];
                    let weight = alpha * t_before;
                    let one_minus = (1.0 - alpha).max(1e-12);
                    let mut dl_dalpha = 0.0;
                    for ch in 0..3 {
                        prefix[ch] += weight * p.color[ch];
                        let suffix = out[ch] - prefix[ch];
                        dl_dalpha += gout[ch] * (p.color[ch] * t_before - suffix / one_minus);
                    }

                    let adj = &mut adjoints[k as usize];
                    for ch in 0..3 {
                        adj.color[ch] += gout[ch] * weight;
                    }
                    let dx = px - p.mean_x;
                    let dy = py - p.mean_y;
                    let md = p.inv_cov * Vector2::new(dx, dy);
                    adj.mean += (dl_dalpha * alpha) * md;
                    adj.cov += (dl_dalpha * 0.5 * alpha) * (md * md.transpose());
                }
            }
        }
        TileResult { loss_sum, adjoints }
    };

    let tiles: Vec<TileResult> = (0..tiles_x * tiles_y)
        .into_par_iter()
        .map(run_tile)
        .collect();

    // Deterministic reduction in tile order.
    let mut loss_sum = 0.0f64;
    let mut adjoints = vec![Adjoint::zero(); prepared.len()];
    for t in tiles {
        loss_sum += t.loss_sum;
        for (a, b) in adjoints.iter_mut().zip(t.adjoints.iter()) {
            a.mean += b.mean;
            a.cov += b.cov;
            a.color += b.color;
        }
    }
    let loss_value = loss_sum * pixel_norm;

    // Chain per-splat adjoints to the pose tangent.
    let r = &camera.world_to_camera.rotation;
    let mut grad = Vector6::zeros();
    for (k, p) in prepared.iter().enumerate() {
        let adj = &adjoints[k];
        if adj.mean == Vector2::zeros()
            && adj.cov == Matrix2::zeros()
            && adj.color == Vector3::zeros()
        {
            continue;
        }
        let splat = &scene.splats[p.splat_index];
        let p_world = splat.position;
        let p_cam = camera.to_camera(&p_world);
        let (x, y, z) = (p_cam[0], p_cam[1], p_cam[2]);
        let sigma_w = splat.covariance3d();
        let v_cam = r * sigma_w * r.transpose();
        let j = crate::project::perspective_jacobian(camera, &p_cam);

        // mean2d = pinhole(p_cam)
        let mut g_pcam = j.transpose() * adj.mean;

        // cov2d = J V J^T: through J (which depends on p_cam) and V (which
        // depends on the rotation increment).
        let dl_dj = 2.0 * adj.cov * j * v_cam;
        let fz2 = camera.fx / (z * z);
        let fy_z2 = camera.fy / (z * z);
        g_pcam[0] += dl_dj[(0, 2)] * (-fz2);
        g_pcam[1] += dl_dj[(1, 2)] * (-fy_z2);
        g_pcam[2] += dl_dj[(0, 0)] * (-fz2)
            + dl_dj[(1, 1)] * (-fy_z2)
            + dl_dj[(0, 2)] * (2.0 * camera.fx * x / (z * z * z))
            + dl_dj[(1, 2)] * (2.0 * camera.fy * y / (z * z * z));
        let g_v = j.transpose() * adj.cov * j;

        // Color -> SH view direction. The blended color is the clamped
        // SH value; saturated channels contribute no direction gradient.
        let dir = view_direction(camera, &p_world);
        let raw = eval_sh(scene.sh_degree, &splat.sh_coeffs, &dir);
        let sh_jac = eval_sh_jacobian(scene.sh_degree, &splat.sh_coeffs, &dir);
        let mut g_dir = Vector3::zeros();
        for ch in 0..3 {
            let shifted = raw[ch] + 0.5;
            if shifted > 0.0 && shifted < 1.0 {
                g_dir += adj.color[ch] * sh_jac[ch];
            }
        }
        // dir_w = R_full^T normalize(p_cam): the p_cam part...
        let p_norm = p_cam.norm();
        let phat = p_cam / p_norm;
        let proj = (Matrix3::identity() - phat * phat.transpose()) / p_norm;
        g_pcam += proj * (r * g_dir);

        // Fold into the tangent: translation rows then rotation rows.
        let g_rho = r.transpose() * g_pcam;
        for a in 0..3 {
            grad[a] += g_rho[a];
        }
        for a in 0..3 {
            let mut e = Vector3::zeros();
            e[a] = 1.0;
            let d_pcam = r * e.cross(&p_world);
            let mut g = d_pcam.dot(&g_pcam);
            let ek = skew(&e);
            let dv = r * (ek * sigma_w - sigma_w * ek) * r.transpose();
            g += (g_v.component_mul(&dv)).sum();
            g += (g_dir.cross(&dir))[a];
            grad[3 + a] += g;
        }
    }

    Ok((loss_value, grad))
}
