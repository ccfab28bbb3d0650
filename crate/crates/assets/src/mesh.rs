use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{io, AssetError};

/// Indexed triangle soup in meters. `face_labels`, when present, names the
/// part each face belongs to and has exactly one entry per face.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub face_labels: Option<Vec<String>>,
}

impl TriangleMesh {
    pub fn new(
        vertices: Vec<Vector3<f64>>,
        faces: Vec<[usize; 3]>,
        face_labels: Option<Vec<String>>,
    ) -> Self {
        Self {
            vertices,
            faces,
            face_labels,
        }
    }

    pub fn validate(&self) -> Result<(), AssetError> {
        if self.faces.is_empty() {
            return Err(AssetError::InvalidMesh {
                reason: "mesh has no faces".into(),
            });
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(AssetError::InvalidMesh {
                    reason: format!("vertex {i} is not finite"),
                });
            }
        }
        for (i, f) in self.faces.iter().enumerate() {
            for &idx in f {
                if idx >= self.vertices.len() {
                    return Err(AssetError::InvalidMesh {
                        reason: format!(
                            "face {i} references vertex {idx} of {}",
                            self.vertices.len()
                        ),
                    });
                }
            }
            if self.face_area(i) == 0.0 {
                return Err(AssetError::InvalidMesh {
                    reason: format!("face {i} is degenerate"),
                });
            }
        }
        if let Some(labels) = &self.face_labels {
            if labels.len() != self.faces.len() {
                return Err(AssetError::InvalidMesh {
                    reason: format!(
                        "{} labels for {} faces",
                        labels.len(),
                        self.faces.len()
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.faces[face];
        let e1 = self.vertices[b] - self.vertices[a];
        let e2 = self.vertices[c] - self.vertices[a];
        0.5 * e1.cross(&e2).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|i| self.face_area(i)).sum()
    }

    /// Axis-aligned bounds as (min, max). Empty meshes yield zeros.
    pub fn bounding_box(&self) -> (Vector3<f64>, Vector3<f64>) {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        if self.vertices.is_empty() {
            return (Vector3::zeros(), Vector3::zeros());
        }
        (lo, hi)
    }

    pub fn translated(&self, offset: &Vector3<f64>) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v += offset;
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v *= s;
        }
        out
    }

    /// Reverses the winding of every face.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        for f in &mut out.faces {
            f.swap(1, 2);
        }
        out
    }
}

/// Loads an ASCII OBJ file. `g` group names become `face_labels`; polygons
/// are fan-triangulated; degenerate faces are dropped during cleanup.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh, AssetError> {
    let file = File::open(path).map_err(|e| io(path, e))?;
    let reader = BufReader::new(file);

    let parse_err = |line: usize, message: String| AssetError::ObjParse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut current_group: Option<String> = None;
    let mut any_group = false;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap();
        match keyword {
            "v" => {
                let mut coords = [0.0f64; 3];
                for c in &mut coords {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| parse_err(lineno, "vertex needs 3 coordinates".into()))?;
                    *c = tok
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad coordinate {tok:?}")))?;
                }
                if !coords.iter().all(|c| c.is_finite()) {
                    return Err(parse_err(lineno, "non-finite coordinate".into()));
                }
                vertices.push(Vector3::new(coords[0], coords[1], coords[2]));
            }
            "f" => {
                let mut poly: Vec<usize> = Vec::new();
                for tok in tokens {
                    // `f v`, `f v/vt`, `f v/vt/vn`, `f v//vn` all start with
                    // the vertex index.
                    let first = tok.split('/').next().unwrap();
                    let raw: i64 = first
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad face index {tok:?}")))?;
                    let idx = if raw > 0 {
                        (raw - 1) as usize
                    } else if raw < 0 {
                        let back = (-raw) as usize;
                        if back > vertices.len() {
                            return Err(parse_err(lineno, format!("face index {raw} out of range")));
                        }
                        vertices.len() - back
                    } else {
                        return Err(parse_err(lineno, "face index 0 is invalid".into()));
                    };
                    if idx >= vertices.len() {
                        return Err(parse_err(
                            lineno,
                            format!("face index {raw} out of range ({} vertices)", vertices.len()),
                        ));
                    }
                    poly.push(idx);
                }
                if poly.len() < 3 {
                    return Err(parse_err(lineno, "face needs at least 3 vertices".into()));
                }
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                    labels.push(current_group.clone());
                }
            }
            "g" | "o" => {
                let name = tokens.collect::<Vec<_>>().join(" ");
                if keyword == "g" {
                    current_group = if name.is_empty() { None } else { Some(name) };
                    any_group = current_group.is_some();
                }
            }
            // Normals, texture coordinates, materials, and smoothing groups
            // carry nothing this pipeline consumes.
            "vn" | "vt" | "vp" | "s" | "usemtl" | "mtllib" | "l" | "p" => {}
            other => {
                return Err(parse_err(lineno, format!("unknown directive {other:?}")));
            }
        }
    }

    let face_labels = if any_group {
        Some(
            labels
                .into_iter()
                .map(|l| l.unwrap_or_else(|| "default".to_string()))
                .collect(),
        )
    } else {
        None
    };

    let mut mesh = TriangleMesh::new(vertices, faces, face_labels);
    drop_degenerate_faces(&mut mesh);
    mesh.validate()?;
    Ok(mesh)
}

fn drop_degenerate_faces(mesh: &mut TriangleMesh) {
    let keep: Vec<bool> = mesh
        .faces
        .iter()
        .enumerate()
        .map(|(i, f)| f[0] != f[1] && f[1] != f[2] && f[0] != f[2] && mesh.face_area(i) > 0.0)
        .collect();
    if keep.iter().all(|&k| k) {
        return;
    }
    let dropped = keep.iter().filter(|&&k| !k).count();
    log::warn!("dropping {dropped} degenerate faces");
    let mut idx = 0;
    mesh.faces.retain(|_| {
        let k = keep[idx];
        idx += 1;
        k
    });
    if let Some(labels) = &mut mesh.face_labels {
        let mut idx = 0;
        labels.retain(|_| {
            let k = keep[idx];
            idx += 1;
            k
        });
    }
}

/// Writes an ASCII OBJ file. Coordinates use the shortest decimal form that
/// parses back to the identical f64, so save/load round-trips bit-exactly.
pub fn save_mesh(mesh: &TriangleMesh, path: &Path) -> Result<(), AssetError> {
    mesh.validate()?;
    let file = File::create(path).map_err(|e| io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = |s: String| w.write_all(s.as_bytes()).map_err(|e| io(path, e));

    for v in &mesh.vertices {
        write(format!("v {} {} {}\n", v.x, v.y, v.z))?;
    }
    let mut last_group: Option<&str> = None;
    for (i, f) in mesh.faces.iter().enumerate() {
        if let Some(labels) = &mesh.face_labels {
            let label = labels[i].as_str();
            if last_group != Some(label) {
                write(format!("g {label}\n"))?;
                last_group = Some(label);
            }
        }
        write(format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Groups faces by label and returns the deduplicated label set in first-use
/// order. Errors when the mesh carries no labels.
pub fn label_set(mesh: &TriangleMesh) -> Result<Vec<String>, AssetError> {
    let labels = mesh
        .face_labels
        .as_ref()
        .ok_or(AssetError::MissingFaceLabels)?;
    let mut seen: HashMap<&str, ()> = HashMap::new();
    let mut out = Vec::new();
    for l in labels {
        if seen.insert(l.as_str(), ()).is_none() {
            out.push(l.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::box_mesh;
    use tempfile::tempdir;

    #[test]
    fn validate_rejects_bad_index() {
        let mesh = TriangleMesh::new(
            vec![Vector3::zeros(), Vector3::x(), Vector3::y()],
            vec![[0, 1, 3]],
            None,
        );
        assert!(matches!(
            mesh.validate(),
            Err(AssetError::InvalidMesh { .. })
        ));
    }

    #[test]
    fn validate_rejects_degenerate_face() {
        let mesh = TriangleMesh::new(
            vec![Vector3::zeros(), Vector3::x(), Vector3::new(2.0, 0.0, 0.0)],
            vec![[0, 1, 2]],
            None,
        );
        assert!(matches!(
            mesh.validate(),
            Err(AssetError::InvalidMesh { .. })
        ));
    }

    #[test]
    fn validate_rejects_label_length_mismatch() {
        let mesh = TriangleMesh::new(
            vec![Vector3::zeros(), Vector3::x(), Vector3::y()],
            vec![[0, 1, 2]],
            Some(vec!["a".into(), "b".into()]),
        );
        assert!(matches!(
            mesh.validate(),
            Err(AssetError::InvalidMesh { .. })
        ));
    }

    #[test]
    fn cube_surface_area() {
        let cube = box_mesh(Vector3::new(1.0, 1.0, 1.0));
        assert!((cube.surface_area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn obj_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.obj");
        let mut mesh = box_mesh(Vector3::new(0.3, 0.17, 0.09));
        // Awkward values exercise the shortest-round-trip formatting.
        mesh.vertices[0].x = 0.1 + 0.2;
        mesh.vertices[3].z = -1.0 / 3.0;
        mesh.face_labels = Some(
            (0..mesh.faces.len())
                .map(|i| if i < 6 { "front half" } else { "back half" }.to_string())
                .collect(),
        );
        save_mesh(&mesh, &path).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(mesh, back);
    }

    #[test]
    fn obj_round_trip_without_labels() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.obj");
        let mesh = box_mesh(Vector3::new(1.0, 2.0, 3.0));
        save_mesh(&mesh, &path).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(mesh, back);
        assert!(back.face_labels.is_none());
    }

    #[test]
    fn obj_groups_become_labels() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.obj");
        std::fs::write(
            &path,
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n\
             g drawer_body\nf 1 2 3\ng main_cabinet\nf 1 3 4\n",
        )
        .unwrap();
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(
            mesh.face_labels,
            Some(vec!["drawer_body".into(), "main_cabinet".into()])
        );
    }

    #[test]
    fn obj_out_of_range_index_is_parse_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.obj");
        std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n").unwrap();
        match load_mesh(&path) {
            Err(AssetError::ObjParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn obj_quads_fan_triangulate() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("quad.obj");
        std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn obj_negative_indices_resolve_from_end() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("neg.obj");
        std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn obj_face_slash_syntax() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("slash.obj");
        std::fs::write(
            &path,
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\nf 1/1/1 2/1/1 3/1/1\n",
        )
        .unwrap();
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn loader_drops_degenerate_faces() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("degen.obj");
        std::fs::write(
            &path,
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nf 1 1 2\nf 2 2 2\n",
        )
        .unwrap();
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.faces.len(), 1);
    }
}
