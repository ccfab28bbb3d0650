use nalgebra::{Matrix2, Vector3};
use r2sim_scene::{CameraModel, GaussianScene};
use rayon::prelude::*;

use crate::project::project_gaussian;
use crate::sh::sh_color;
use crate::{RenderError, RenderOptions};

/// One rendered view. Buffers are row-major, pixel (x, y) at `y * width + x`.
#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub width: usize,
    pub height: usize,
    /// H*W*3 RGB in [0,1]: foreground plus background weighted by the
    /// remaining transmittance.
    pub color: Vec<f64>,
    /// H*W accumulated opacity, exactly 1 - final transmittance.
    pub alpha: Vec<f64>,
    /// H*W*d feature map (no background term), present when requested.
    pub feature: Option<Vec<f64>>,
    /// H*W number of splats that contributed to each pixel.
    pub contributors: Vec<u32>,
}

impl RenderOutput {
    pub fn pixel_color(&self, x: usize, y: usize) -> [f64; 3] {
        let o = (y * self.width + x) * 3;
        [self.color[o], self.color[o + 1], self.color[o + 2]]
    }

    pub fn pixel_alpha(&self, x: usize, y: usize) -> f64 {
        self.alpha[y * self.width + x]
    }

    pub fn pixel_feature(&self, x: usize, y: usize, dim: usize) -> &[f64] {
        let f = self.feature.as_ref().expect("feature map was rendered");
        let o = (y * self.width + x) * dim;
        &f[o..o + dim]
    }
}

/// A splat's contribution to one pixel: the blending weight alpha_i * T_i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelContribution {
    pub splat_index: u32,
    pub weight: f64,
}

/// Splat prepared for blending, in depth order. Shared with the gradient
/// pass so forward renders there are bit-identical to `rasterize`.
pub(crate) struct Prepared {
    pub(crate) splat_index: usize,
    pub(crate) mean_x: f64,
    pub(crate) mean_y: f64,
    pub(crate) inv_cov: Matrix2<f64>,
    pub(crate) color: [f64; 3],
    pub(crate) base_alpha: f64,
    pub(crate) depth: f64,
    // Inclusive pixel bounding box of the 3-sigma ellipse.
    pub(crate) x0: i64,
    pub(crate) x1: i64,
    pub(crate) y0: i64,
    pub(crate) y1: i64,
}

pub(crate) fn prepare_splats(
    scene: &GaussianScene,
    camera: &CameraModel,
    opts: &RenderOptions,
) -> Vec<Prepared> {
    let center = camera.center_in_world();
    let mut prepared: Vec<Prepared> = Vec::new();
    for (i, splat) in scene.splats.iter().enumerate() {
        let Some(proj) = project_gaussian(splat, i, camera, opts.lambda_lowpass, opts.near) else {
            continue;
        };
        if proj.depth >= opts.far {
            continue;
        }
        let det = proj.cov2d[(0, 0)] * proj.cov2d[(1, 1)] - proj.cov2d[(0, 1)] * proj.cov2d[(1, 0)];
        if !(det > 0.0) || !det.is_finite() {
            continue;
        }
        let inv_cov = Matrix2::new(
            proj.cov2d[(1, 1)] / det,
            -proj.cov2d[(0, 1)] / det,
            -proj.cov2d[(1, 0)] / det,
            proj.cov2d[(0, 0)] / det,
        );
        let r = proj.radius3();
        let x0 = (proj.mean2d[0] - r).ceil() as i64;
        let x1 = (proj.mean2d[0] + r).floor() as i64;
        let y0 = (proj.mean2d[1] - r).ceil() as i64;
        let y1 = (proj.mean2d[1] + r).floor() as i64;
        if x1 < 0 || y1 < 0 || x0 > camera.width as i64 - 1 || y0 > camera.height as i64 - 1 {
            continue;
        }
        let dir = (splat.position - center).normalize();
        prepared.push(Prepared {
            splat_index: i,
            mean_x: proj.mean2d[0],
            mean_y: proj.mean2d[1],
            inv_cov,
            color: sh_color(scene.sh_degree, &splat.sh_coeffs, &dir),
            base_alpha: splat.opacity(),
            depth: proj.depth,
            x0: x0.max(0),
            x1: x1.min(camera.width as i64 - 1),
            y0: y0.max(0),
            y1: y1.min(camera.height as i64 - 1),
        });
    }
    // Front-to-back: ascending camera-frame z, ties by splat index so the
    // blend order is total and renders are reproducible.
    prepared.sort_unstable_by(|a, b| {
        a.depth
            .partial_cmp(&b.depth)
            .expect("depths are finite")
            .then(a.splat_index.cmp(&b.splat_index))
    });
    prepared
}

/// Builds per-tile splat lists; each list preserves the global depth order.
pub(crate) fn build_tile_lists(
    prepared: &[Prepared],
    tiles_x: usize,
    tiles_y: usize,
    ts: usize,
) -> Vec<Vec<u32>> {
    let mut tile_lists: Vec<Vec<u32>> = vec![Vec::new(); tiles_x * tiles_y];
    for (k, p) in prepared.iter().enumerate() {
        let tx0 = (p.x0 as usize) / ts;
        let tx1 = ((p.x1 as usize) / ts).min(tiles_x - 1);
        let ty0 = (p.y0 as usize) / ts;
        let ty1 = ((p.y1 as usize) / ts).min(tiles_y - 1);
        for ty in ty0..=ty1 {
            for tx in tx0..=tx1 {
                tile_lists[ty * tiles_x + tx].push(k as u32);
            }
        }
    }
    tile_lists
}

/// Gaussian falloff exponent at the pixel; contributes only when q <= 9
/// (the 3-sigma cutoff).
#[inline]
pub(crate) fn falloff_q(p: &Prepared, px: f64, py: f64) -> f64 {
    let dx = px - p.mean_x;
    let dy = py - p.mean_y;
    p.inv_cov[(0, 0)] * dx * dx
        + (p.inv_cov[(0, 1)] + p.inv_cov[(1, 0)]) * dx * dy
        + p.inv_cov[(1, 1)] * dy * dy
}

pub fn rasterize(
    scene: &GaussianScene,
    camera: &CameraModel,
    opts: &RenderOptions,
) -> Result<RenderOutput, RenderError> {
    let (out, _) = render_core(scene, camera, opts, false)?;
    Ok(out)
}

/// Like [`rasterize`], additionally returning each pixel's contributor list
/// (splat index, blending weight alpha_i * T_i) in blend order. The weights
/// are what feature training freezes.
pub fn rasterize_with_contributions(
    scene: &GaussianScene,
    camera: &CameraModel,
    opts: &RenderOptions,
) -> Result<(RenderOutput, Vec<Vec<PixelContribution>>), RenderError> {
    let (out, contribs) = render_core(scene, camera, opts, true)?;
    Ok((out, contribs.expect("contributions were collected")))
}

#[allow(clippy::type_complexity)]
fn render_core(
    scene: &GaussianScene,
    camera: &CameraModel,
    opts: &RenderOptions,
    collect_contributions: bool,
) -> Result<(RenderOutput, Option<Vec<Vec<PixelContribution>>>), RenderError> {
    camera.validate()?;
    let (w, h) = (camera.width as usize, camera.height as usize);
    if w == 0 || h == 0 {
        return Err(RenderError::ZeroImageDims {
            width: camera.width,
            height: camera.height,
        });
    }
    let feat_dim = if opts.render_features {
        if scene.feature_dim == 0 {
            return Err(RenderError::FeatureDimZero);
        }
        scene.feature_dim
    } else {
        0
    };

    let prepared = prepare_splats(scene, camera, opts);

    let ts = opts.tile_size.max(1);
    let tiles_x = w.div_ceil(ts);
    let tiles_y = h.div_ceil(ts);
    let tile_lists = build_tile_lists(&prepared, tiles_x, tiles_y, ts);

    struct TileBuf {
        color: Vec<f64>,
        alpha: Vec<f64>,
        feature: Vec<f64>,
        contributors: Vec<u32>,
        contributions: Vec<Vec<PixelContribution>>,
        px0: usize,
        py0: usize,
        pw: usize,
        ph: usize,
    }

    let render_tile = |tile_idx: usize| -> TileBuf {
        let (tx, ty) = (tile_idx % tiles_x, tile_idx / tiles_x);
        let px0 = tx * ts;
        let py0 = ty * ts;
        let pw = ts.min(w - px0);
        let ph = ts.min(h - py0);
        let list = &tile_lists[tile_idx];
        let mut buf = TileBuf {
            color: vec![0.0; pw * ph * 3],
            alpha: vec![0.0; pw * ph],
            feature: vec![0.0; pw * ph * feat_dim],
            contributors: vec![0; pw * ph],
            contributions: if collect_contributions {
                vec![Vec::new(); pw * ph]
            } else {
                Vec::new()
            },
            px0,
            py0,
            pw,
            ph,
        };
        for ly in 0..ph {
            for lx in 0..pw {
                let (px, py) = ((px0 + lx) as f64, (py0 + ly) as f64);
                let local = ly * pw + lx;
                let mut transmittance = 1.0f64;
                let mut rgb = [0.0f64; 3];
                let mut count = 0u32;
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
                    if feat_dim > 0 {
                        let f = &scene.splats[p.splat_index].feature;
                        let o = local * feat_dim;
                        for (j, fv) in f.iter().enumerate() {
                            buf.feature[o + j] += weight * fv;
                        }
                    }
                    if collect_contributions {
                        buf.contributions[local].push(PixelContribution {
                            splat_index: p.splat_index as u32,
                            weight,
                        });
                    }
                    count += 1;
                    transmittance *= 1.0 - alpha;
                    if transmittance < opts.epsilon_t {
                        break;
                    }
                }
                for ch in 0..3 {
                    buf.color[local * 3 + ch] = rgb[ch] + opts.background[ch] * transmittance;
                }
                buf.alpha[local] = 1.0 - transmittance;
                buf.contributors[local] = count;
            }
        }
        buf
    };

    // Tiles own disjoint output regions; stitching in tile order keeps the
    // result independent of the worker count.
    let tiles: Vec<TileBuf> = (0..tiles_x * tiles_y)
        .into_par_iter()
        .map(render_tile)
        .collect();

    let mut out = RenderOutput {
        width: w,
        height: h,
        color: vec![0.0; w * h * 3],
        alpha: vec![0.0; w * h],
        feature: if feat_dim > 0 {
            Some(vec![0.0; w * h * feat_dim])
        } else {
            None
        },
        contributors: vec![0; w * h],
    };
    let mut contributions = if collect_contributions {
        Some(vec![Vec::new(); w * h])
    } else {
        None
    };
    for buf in tiles {
        for ly in 0..buf.ph {
            let gy = buf.py0 + ly;
            for lx in 0..buf.pw {
                let gx = buf.px0 + lx;
                let local = ly * buf.pw + lx;
                let global = gy * w + gx;
                out.color[global * 3..global * 3 + 3]
                    .copy_from_slice(&buf.color[local * 3..local * 3 + 3]);
                out.alpha[global] = buf.alpha[local];
                out.contributors[global] = buf.contributors[local];
                if let Some(fmap) = out.feature.as_mut() {
                    fmap[global * feat_dim..(global + 1) * feat_dim]
                        .copy_from_slice(&buf.feature[local * feat_dim..(local + 1) * feat_dim]);
                }
            }
        }
        if let Some(c) = contributions.as_mut() {
            let mut buf = buf;
            for ly in 0..buf.ph {
                for lx in 0..buf.pw {
                    let local = ly * buf.pw + lx;
                    let global = (buf.py0 + ly) * w + (buf.px0 + lx);
                    c[global] = std::mem::take(&mut buf.contributions[local]);
                }
            }
        }
    }
    Ok((out, contributions))
}

/// View direction used for SH evaluation: camera origin toward the splat
/// mean, world frame.
pub(crate) fn view_direction(camera: &CameraModel, position: &Vector3<f64>) -> Vector3<f64> {
    (position - camera.center_in_world()).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use r2sim_scene::{GaussianSplat, RigidTransform};

    fn camera(w: u32, h: u32) -> CameraModel {
        CameraModel {
            fx: 80.0,
            fy: 80.0,
            cx: (w as f64 - 1.0) / 2.0,
            cy: (h as f64 - 1.0) / 2.0,
            width: w,
            height: h,
            world_to_camera: RigidTransform::identity(),
        }
    }

    fn blob(pos: Vector3<f64>, sigma: f64, logit: f64, dc: [f64; 3]) -> GaussianSplat {
        let mut s = GaussianSplat::zeroed(0, 0);
        s.position = pos;
        s.rotation = [1.0, 0.0, 0.0, 0.0];
        s.log_scale = Vector3::repeat(sigma.ln());
        s.opacity_logit = logit;
        s.sh_coeffs[0] = dc;
        s
    }

    #[test]
    fn empty_scene_renders_background() {
        let cam = camera(8, 6);
        let scene = GaussianScene::new(vec![], 0, 0);
        let opts = RenderOptions {
            background: [0.25, 0.5, 0.75],
            ..Default::default()
        };
        let out = rasterize(&scene, &cam, &opts).unwrap();
        for y in 0..6 {
            for x in 0..8 {
                assert_eq!(out.pixel_color(x, y), [0.25, 0.5, 0.75]);
                assert_eq!(out.pixel_alpha(x, y), 0.0);
            }
        }
    }

    #[test]
    fn single_splat_blends_with_background() {
        let cam = camera(33, 33);
        // DC coefficient 0 -> color 0.5 after the SH offset.
        let scene = GaussianScene::new(
            vec![blob(Vector3::new(0.0, 0.0, 1.0), 0.05, 0.7, [0.0; 3])],
            0,
            0,
        );
        let opts = RenderOptions {
            background: [1.0, 0.0, 0.0],
            ..Default::default()
        };
        let out = rasterize(&scene, &cam, &opts).unwrap();
        // Center pixel (16,16) is exactly on the projected mean: q = 0.
        let alpha = scene.splats[0].opacity();
        let expect = [alpha * 0.5 + (1.0 - alpha) * 1.0, alpha * 0.5, alpha * 0.5];
        let got = out.pixel_color(16, 16);
        for ch in 0..3 {
            assert!((got[ch] - expect[ch]).abs() < 1e-12, "{got:?} vs {expect:?}");
        }
        assert!((out.pixel_alpha(16, 16) - alpha).abs() < 1e-12);
        assert_eq!(out.contributors[16 * 33 + 16], 1);
    }

    #[test]
    fn two_splats_composite_front_to_back() {
        let cam = camera(33, 33);
        let front = blob(Vector3::new(0.0, 0.0, 1.0), 0.05, 0.3, [0.4, 0.0, 0.0]);
        let back = blob(Vector3::new(0.0, 0.0, 2.0), 0.1, 0.9, [0.0, 0.4, 0.0]);
        let scene = GaussianScene::new(vec![front, back], 0, 0);
        let opts = RenderOptions::default();
        let out = rasterize(&scene, &cam, &opts).unwrap();

        let a1 = scene.splats[0].opacity();
        let a2 = scene.splats[1].opacity();
        let c1 = sh_color(0, &scene.splats[0].sh_coeffs, &Vector3::z());
        let c2 = sh_color(0, &scene.splats[1].sh_coeffs, &Vector3::z());
        let got = out.pixel_color(16, 16);
        for ch in 0..3 {
            let expect = a1 * c1[ch] + (1.0 - a1) * a2 * c2[ch];
            assert!((got[ch] - expect).abs() < 1e-12, "channel {ch}");
        }
    }

    #[test]
    fn feature_map_shares_blending_weights_with_color() {
        // d = 3 features equal to each splat's color must reproduce the
        // foreground part of the color image exactly.
        let cam = camera(17, 17);
        let mut splats = Vec::new();
        for (i, z) in [1.0, 1.5, 2.2].iter().enumerate() {
            let mut s = blob(
                Vector3::new(0.02 * i as f64, -0.01, *z),
                0.08,
                0.4 + 0.3 * i as f64,
                [0.1 * i as f64, 0.05, -0.1],
            );
            s.feature = sh_color(0, &s.sh_coeffs, &Vector3::z()).to_vec();
            splats.push(s);
        }
        let scene = GaussianScene::new(splats, 0, 3);
        let opts = RenderOptions {
            render_features: true,
            background: [0.0; 3],
            ..Default::default()
        };
        let out = rasterize(&scene, &cam, &opts).unwrap();
        for y in 0..17 {
            for x in 0..17 {
                let c = out.pixel_color(x, y);
                let f = out.pixel_feature(x, y, 3);
                for ch in 0..3 {
                    assert_eq!(c[ch], f[ch], "pixel ({x},{y}) channel {ch}");
                }
            }
        }
    }

    #[test]
    fn feature_render_without_features_errors() {
        let cam = camera(8, 8);
        let scene = GaussianScene::new(vec![], 0, 0);
        let opts = RenderOptions {
            render_features: true,
            ..Default::default()
        };
        assert!(matches!(
            rasterize(&scene, &cam, &opts),
            Err(RenderError::FeatureDimZero)
        ));
    }

    #[test]
    fn contributions_reconstruct_the_feature_map() {
        let cam = camera(17, 17);
        let mut splats = Vec::new();
        for i in 0..5 {
            let mut s = blob(
                Vector3::new(0.03 * (i as f64 - 2.0), 0.01 * i as f64, 1.0 + 0.2 * i as f64),
                0.06,
                0.5,
                [0.0; 3],
            );
            s.feature = vec![i as f64, 1.0 - i as f64];
            splats.push(s);
        }
        let scene = GaussianScene::new(splats, 0, 2);
        let opts = RenderOptions {
            render_features: true,
            ..Default::default()
        };
        let (out, contribs) = rasterize_with_contributions(&scene, &cam, &opts).unwrap();
        for y in 0..17usize {
            for x in 0..17usize {
                let mut acc = [0.0f64; 2];
                for c in &contribs[y * 17 + x] {
                    let f = &scene.splats[c.splat_index as usize].feature;
                    acc[0] += c.weight * f[0];
                    acc[1] += c.weight * f[1];
                }
                let f = out.pixel_feature(x, y, 2);
                assert!((acc[0] - f[0]).abs() < 1e-14);
                assert!((acc[1] - f[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn render_is_identical_across_thread_counts() {
        let cam = camera(40, 30);
        let mut splats = Vec::new();
        let mut state = 1234567u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..120 {
            splats.push(blob(
                Vector3::new(next() - 0.5, next() - 0.5, 0.5 + 2.0 * next()),
                0.01 + 0.05 * next(),
                4.0 * next() - 1.0,
                [next() - 0.5, next() - 0.5, next() - 0.5],
            ));
        }
        let scene = GaussianScene::new(splats, 0, 0);
        let opts = RenderOptions::default();

        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| rasterize(&scene, &cam, &opts).unwrap());
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| rasterize(&scene, &cam, &opts).unwrap());
        assert_eq!(single.color, multi.color);
        assert_eq!(single.alpha, multi.alpha);
        assert_eq!(single.contributors, multi.contributors);
    }

    #[test]
    fn alpha_stays_in_unit_interval() {
        let cam = camera(21, 21);
        let mut splats = Vec::new();
        for i in 0..40 {
            splats.push(blob(
                Vector3::new(0.0, 0.0, 1.0 + 0.01 * i as f64),
                0.2,
                8.0,
                [0.5, 0.5, 0.5],
            ));
        }
        let scene = GaussianScene::new(splats, 0, 0);
        let out = rasterize(&scene, &cam, &RenderOptions::default()).unwrap();
        for &a in &out.alpha {
            assert!((0.0..=1.0).contains(&a));
        }
    }
}
