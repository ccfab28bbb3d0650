use nalgebra::Vector3;
use r2sim_assets::TriangleMesh;
use r2sim_render::RgbImage64;

use crate::error::AnnotateError;

/// (right, up, toward_camera) bases for the four canonical views.
const VIEW_BASES: [(Vector3<f64>, Vector3<f64>, Vector3<f64>); 4] = [
    // from +x
    (
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(1.0, 0.0, 0.0),
    ),
    // from -x
    (
        Vector3::new(0.0, -1.0, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(-1.0, 0.0, 0.0),
    ),
    // from +y
    (
        Vector3::new(-1.0, 0.0, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(0.0, 1.0, 0.0),
    ),
    // from +z
    (
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
    ),
];

const BACKGROUND: f64 = 1.0;

fn edge(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    (px - ax) * (by - ay) - (py - ay) * (bx - ax)
}

fn render_view(
    mesh: &TriangleMesh,
    resolution: usize,
    right: Vector3<f64>,
    up: Vector3<f64>,
    toward_camera: Vector3<f64>,
) -> RgbImage64 {
    // Frame to the projected bounding box with a 10% margin, uniform scale.
    let (mut lo_u, mut hi_u) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_v, mut hi_v) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &mesh.vertices {
        let u = p.dot(&right);
        let v = p.dot(&up);
        lo_u = lo_u.min(u);
        hi_u = hi_u.max(u);
        lo_v = lo_v.min(v);
        hi_v = hi_v.max(v);
    }
    let cu = 0.5 * (lo_u + hi_u);
    let cv = 0.5 * (lo_v + hi_v);
    let span = (hi_u - lo_u).max(hi_v - lo_v).max(1e-9) * 1.1;
    let ppu = resolution as f64 / span;
    let half = (resolution as f64 - 1.0) / 2.0;
    let to_px = |u: f64| (u - cu) * ppu + half;
    let to_py = |v: f64| (cv - v) * ppu + half;

    let mut img = RgbImage64::new(resolution, resolution);
    img.data.fill(BACKGROUND);
    let mut zbuf = vec![f64::NEG_INFINITY; resolution * resolution];

    for f in &mesh.faces {
        let (a, b, c) = (
            mesh.vertices[f[0]],
            mesh.vertices[f[1]],
            mesh.vertices[f[2]],
        );
        let n = (b - a).cross(&(c - a));
        let norm = n.norm();
        if norm == 0.0 {
            continue;
        }
        let shade = 0.2 + 0.7 * (n.dot(&toward_camera) / norm).abs();

        let pts = [a, b, c].map(|p| {
            (
                to_px(p.dot(&right)),
                to_py(p.dot(&up)),
                p.dot(&toward_camera),
            )
        });
        let x_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let x_max = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).ceil().min(resolution as f64 - 1.0) as usize;
        let y_min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let y_max = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil().min(resolution as f64 - 1.0) as usize;
        if x_min > x_max || y_min > y_max {
            continue;
        }

        for y in y_min..=y_max {
            for x in x_min..=x_max {
                let (px, py) = (x as f64, y as f64);
                let w0 = edge(pts[1].0, pts[1].1, pts[2].0, pts[2].1, px, py);
                let w1 = edge(pts[2].0, pts[2].1, pts[0].0, pts[0].1, px, py);
                let w2 = edge(pts[0].0, pts[0].1, pts[1].0, pts[1].1, px, py);
                let covered = (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0)
                    || (w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0);
                if !covered {
                    continue;
                }
                let sum = w0 + w1 + w2;
                if sum == 0.0 {
                    continue;
                }
                let depth = (w0 * pts[0].2 + w1 * pts[1].2 + w2 * pts[2].2) / sum;
                let idx = y * resolution + x;
                if depth > zbuf[idx] {
                    zbuf[idx] = depth;
                    img.set_pixel(x, y, [shade, shade, shade]);
                }
            }
        }
    }
    img
}

/// Flat-shaded orthographic silhouette renders from +x, −x, +y, and +z,
/// each framed to the mesh bounding box with a 10% margin. Purely
/// deterministic: the same mesh yields bit-identical images.
pub fn render_orthographic_views(
    mesh: &TriangleMesh,
    resolution: usize,
) -> Result<[RgbImage64; 4], AnnotateError> {
    if mesh.faces.is_empty() || mesh.vertices.is_empty() {
        return Err(AnnotateError::EmptyMesh);
    }
    if resolution < 8 {
        return Err(AnnotateError::Config(format!(
            "view resolution {resolution} is too small"
        )));
    }
    Ok(VIEW_BASES.map(|(right, up, toward)| render_view(mesh, resolution, right, up, toward)))
}
