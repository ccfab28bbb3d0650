//! Binary little-endian splat PLY interchange.
//!
//! Per-vertex float32 properties, in this order:
//! `x y z nx ny nz f_dc_0 f_dc_1 f_dc_2 f_rest_0 .. f_rest_{3(L+1)^2-4}
//!  opacity scale_0 scale_1 scale_2 rot_0 rot_1 rot_2 rot_3
//!  [feature_0 .. feature_{d-1}]`
//!
//! `nx ny nz` are read and ignored, written as zeros. `rot_0` is the
//! quaternion's scalar part. `f_rest` is channel-major: all higher-order
//! coefficients for R, then G, then B, matching common splat exporters.

use std::fs;
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian};

use crate::{GaussianScene, GaussianSplat, SceneError};

/// Quaternions further than this from unit norm are renormalized on load.
/// Loose enough that float32 storage of a unit quaternion passes untouched.
const QUAT_NORM_TOL: f64 = 1e-6;

/// Loads a splat scene, inferring both the SH degree and the feature
/// dimension from the header. A file without `feature_*` properties yields
/// `feature_dim = 0` with empty per-splat feature vectors.
pub fn load_splat_ply(path: &Path) -> Result<GaussianScene, SceneError> {
    load_splat_ply_with_feature_dim(path, 0)
}

/// Like [`load_splat_ply`], but a file without `feature_*` properties gets
/// zero-initialized feature vectors of length `default_feature_dim`. A file
/// that does carry features must match that dimension.
pub fn load_splat_ply_with_feature_dim(
    path: &Path,
    default_feature_dim: usize,
) -> Result<GaussianScene, SceneError> {
    let bytes = fs::read(path).map_err(|e| SceneError::io(path, e))?;
    let (header, body) = split_header(&bytes)?;
    let layout = parse_header(header)?;

    let (file_dim, feature_dim) = if layout.feature_dim == 0 {
        (0, default_feature_dim)
    } else {
        if default_feature_dim != 0 && layout.feature_dim != default_feature_dim {
            return Err(SceneError::InvalidScene(format!(
                "file carries {} feature properties but {} were requested",
                layout.feature_dim, default_feature_dim
            )));
        }
        (layout.feature_dim, layout.feature_dim)
    };

    let stride = layout.property_count() * 4;
    let expected = layout.vertex_count * stride;
    if body.len() < expected {
        return Err(SceneError::MalformedHeader(format!(
            "vertex data truncated: need {} bytes for {} vertices, found {}",
            expected,
            layout.vertex_count,
            body.len()
        )));
    }
    if body.len() > expected {
        return Err(SceneError::MalformedHeader(format!(
            "{} trailing bytes after vertex data",
            body.len() - expected
        )));
    }

    let sh_terms = (layout.sh_degree + 1) * (layout.sh_degree + 1);
    let rest_terms = sh_terms - 1;
    let mut splats = Vec::with_capacity(layout.vertex_count);
    let mut renormalized = 0usize;

    for v in 0..layout.vertex_count {
        let rec = &body[v * stride..(v + 1) * stride];
        let val = |slot: usize| LittleEndian::read_f32(&rec[slot * 4..slot * 4 + 4]) as f64;
        for slot in 0..layout.property_count() {
            if !val(slot).is_finite() {
                return Err(SceneError::NonFinite {
                    vertex: v,
                    property: layout.property_name(slot, rest_terms),
                });
            }
        }

        let mut splat = GaussianSplat::zeroed(layout.sh_degree, feature_dim);
        splat.position = nalgebra::Vector3::new(val(0), val(1), val(2));
        // slots 3..6 are nx ny nz, ignored
        for ch in 0..3 {
            splat.sh_coeffs[0][ch] = val(6 + ch);
        }
        for ch in 0..3 {
            for k in 0..rest_terms {
                splat.sh_coeffs[1 + k][ch] = val(9 + ch * rest_terms + k);
            }
        }
        let base = 9 + 3 * rest_terms;
        splat.opacity_logit = val(base);
        splat.log_scale = nalgebra::Vector3::new(val(base + 1), val(base + 2), val(base + 3));
        for i in 0..4 {
            splat.rotation[i] = val(base + 4 + i);
        }
        for i in 0..file_dim {
            splat.feature[i] = val(base + 8 + i);
        }

        let norm = splat.rotation.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(SceneError::DegenerateQuaternion { vertex: v });
        }
        if (norm - 1.0).abs() > QUAT_NORM_TOL {
            for x in &mut splat.rotation {
                *x /= norm;
            }
            renormalized += 1;
        }

        splats.push(splat);
    }

    if renormalized > 0 {
        log::warn!(
            "renormalized {renormalized} of {} quaternions while loading {}",
            layout.vertex_count,
            path.display()
        );
    }

    Ok(GaussianScene::new(splats, layout.sh_degree, feature_dim))
}

/// Writes a scene in the layout documented at the top of this module.
/// Output loads back fieldwise bit-equal whenever every field is exactly
/// representable in float32 and quaternions are unit within the load
/// tolerance. The label table is not part of the PLY and travels separately.
pub fn save_splat_ply(scene: &GaussianScene, path: &Path) -> Result<(), SceneError> {
    scene.validate()?;
    let sh_terms = (scene.sh_degree + 1) * (scene.sh_degree + 1);
    let rest_terms = sh_terms - 1;

    let mut header = String::new();
    header.push_str("ply\nformat binary_little_endian 1.0\n");
    header.push_str(&format!("element vertex {}\n", scene.splats.len()));
    let mut push_prop = |name: &str| header.push_str(&format!("property float {name}\n"));
    for name in ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"] {
        push_prop(name);
    }
    for k in 0..3 * rest_terms {
        push_prop(&format!("f_rest_{k}"));
    }
    push_prop("opacity");
    for k in 0..3 {
        push_prop(&format!("scale_{k}"));
    }
    for k in 0..4 {
        push_prop(&format!("rot_{k}"));
    }
    for k in 0..scene.feature_dim {
        push_prop(&format!("feature_{k}"));
    }
    header.push_str("end_header\n");

    let props = 17 + 3 * rest_terms + scene.feature_dim;
    let mut out = Vec::with_capacity(header.len() + scene.splats.len() * props * 4);
    out.extend_from_slice(header.as_bytes());

    let mut buf = [0u8; 4];
    let mut put = |out: &mut Vec<u8>, v: f64| {
        LittleEndian::write_f32(&mut buf, v as f32);
        out.extend_from_slice(&buf);
    };
    for s in &scene.splats {
        for i in 0..3 {
            put(&mut out, s.position[i]);
        }
        for _ in 0..3 {
            put(&mut out, 0.0); // nx ny nz
        }
        for ch in 0..3 {
            put(&mut out, s.sh_coeffs[0][ch]);
        }
        for ch in 0..3 {
            for k in 0..rest_terms {
                put(&mut out, s.sh_coeffs[1 + k][ch]);
            }
        }
        put(&mut out, s.opacity_logit);
        for i in 0..3 {
            put(&mut out, s.log_scale[i]);
        }
        for i in 0..4 {
            put(&mut out, s.rotation[i]);
        }
        for i in 0..scene.feature_dim {
            put(&mut out, s.feature[i]);
        }
    }

    fs::write(path, out).map_err(|e| SceneError::io(path, e))
}

struct PlyLayout {
    vertex_count: usize,
    sh_degree: usize,
    feature_dim: usize,
}

impl PlyLayout {
    fn property_count(&self) -> usize {
        let rest = 3 * ((self.sh_degree + 1) * (self.sh_degree + 1) - 1);
        17 + rest + self.feature_dim
    }

    fn property_name(&self, slot: usize, rest_terms: usize) -> String {
        let fixed = ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"];
        if slot < 9 {
            return fixed[slot].to_string();
        }
        if slot < 9 + 3 * rest_terms {
            return format!("f_rest_{}", slot - 9);
        }
        let base = 9 + 3 * rest_terms;
        match slot - base {
            0 => "opacity".to_string(),
            1..=3 => format!("scale_{}", slot - base - 1),
            4..=7 => format!("rot_{}", slot - base - 4),
            k => format!("feature_{}", k - 8),
        }
    }
}

fn split_header(bytes: &[u8]) -> Result<(&str, &[u8]), SceneError> {
    const END: &[u8] = b"end_header\n";
    let pos = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| SceneError::MalformedHeader("no end_header line".into()))?;
    let header_end = pos + END.len();
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| SceneError::MalformedHeader("header is not valid UTF-8".into()))?;
    Ok((header, &bytes[header_end..]))
}

fn parse_header(header: &str) -> Result<PlyLayout, SceneError> {
    let mut lines = header
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("comment"));

    if lines.next() != Some("ply") {
        return Err(SceneError::MalformedHeader(
            "first line must be `ply`".into(),
        ));
    }
    if lines.next() != Some("format binary_little_endian 1.0") {
        return Err(SceneError::MalformedHeader(
            "only `format binary_little_endian 1.0` is supported".into(),
        ));
    }

    let element = lines
        .next()
        .ok_or_else(|| SceneError::MalformedHeader("missing element line".into()))?;
    let vertex_count = element
        .strip_prefix("element vertex ")
        .and_then(|n| n.parse::<usize>().ok())
        .ok_or_else(|| SceneError::MalformedHeader(format!("expected `element vertex N`, got `{element}`")))?;

    let mut names = Vec::new();
    for line in lines {
        if line == "end_header" {
            break;
        }
        if let Some(name) = line.strip_prefix("property float ") {
            names.push(name.to_string());
        } else if line.starts_with("element ") {
            return Err(SceneError::MalformedHeader(format!(
                "unsupported second element: `{line}`"
            )));
        } else {
            return Err(SceneError::MalformedHeader(format!(
                "unsupported header line: `{line}` (only float properties)"
            )));
        }
    }

    // Fixed prefix.
    let mut it = names.iter().map(String::as_str).peekable();
    for want in ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"] {
        match it.next() {
            Some(got) if got == want => {}
            Some(got) => {
                return Err(SceneError::MalformedHeader(format!(
                    "expected property `{want}`, found `{got}`"
                )))
            }
            None => return Err(SceneError::MissingProperty(want.to_string())),
        }
    }

    // Contiguous f_rest_0..k block (possibly empty).
    let mut rest_count = 0usize;
    while let Some(name) = it.peek() {
        if let Some(idx) = name.strip_prefix("f_rest_") {
            let idx: usize = idx.parse().map_err(|_| {
                SceneError::MalformedHeader(format!("bad f_rest index in `{name}`"))
            })?;
            if idx != rest_count {
                return Err(SceneError::MalformedHeader(format!(
                    "f_rest properties out of order: expected f_rest_{rest_count}, found `{name}`"
                )));
            }
            rest_count += 1;
            it.next();
        } else {
            break;
        }
    }
    let sh_degree = match rest_count {
        0 => 0,
        9 => 1,
        24 => 2,
        45 => 3,
        _ => return Err(SceneError::InconsistentShProperties { count: rest_count }),
    };

    let mut tail = vec!["opacity".to_string()];
    tail.extend((0..3).map(|k| format!("scale_{k}")));
    tail.extend((0..4).map(|k| format!("rot_{k}")));
    for want in &tail {
        match it.next() {
            Some(got) if got == want => {}
            Some(got) => {
                return Err(SceneError::MalformedHeader(format!(
                    "expected property `{want}`, found `{got}`"
                )))
            }
            None => return Err(SceneError::MissingProperty(want.clone())),
        }
    }

    // Optional contiguous feature_0..d-1 block; nothing may follow it.
    let mut feature_dim = 0usize;
    for name in it {
        match name.strip_prefix("feature_").and_then(|i| i.parse::<usize>().ok()) {
            Some(idx) if idx == feature_dim => feature_dim += 1,
            _ => {
                return Err(SceneError::MalformedHeader(format!(
                    "unexpected property after rot_3: `{name}`"
                )))
            }
        }
    }

    Ok(PlyLayout {
        vertex_count,
        sh_degree,
        feature_dim,
    })
}
