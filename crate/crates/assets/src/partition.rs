use std::collections::HashMap;

use crate::error::AssetError;
use crate::mesh::TriangleMesh;

/// Splits a face-labeled mesh into its mobile and base parts. Each output
/// keeps only the faces carrying its label, with vertices compacted and
/// reindexed in first-use order. Faces with other labels are dropped.
pub fn partition_mesh(
    mesh: &TriangleMesh,
    mobile_label: &str,
    base_label: &str,
) -> Result<(TriangleMesh, TriangleMesh), AssetError> {
    mesh.validate()?;
    let labels = mesh
        .face_labels
        .as_ref()
        .ok_or(AssetError::MissingFaceLabels)?;
    let mobile = extract(mesh, labels, mobile_label)?;
    let base = extract(mesh, labels, base_label)?;
    Ok((mobile, base))
}

fn extract(
    mesh: &TriangleMesh,
    labels: &[String],
    label: &str,
) -> Result<TriangleMesh, AssetError> {
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (f, l) in mesh.faces.iter().zip(labels) {
        if l != label {
            continue;
        }
        let mut out = [0usize; 3];
        for (slot, &idx) in out.iter_mut().zip(f) {
            *slot = *remap.entry(idx).or_insert_with(|| {
                vertices.push(mesh.vertices[idx]);
                vertices.len() - 1
            });
        }
        faces.push(out);
    }
    if faces.is_empty() {
        return Err(AssetError::EmptyLabel {
            label: label.to_string(),
        });
    }
    let count = faces.len();
    Ok(TriangleMesh::new(
        vertices,
        faces,
        Some(vec![label.to_string(); count]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::box_mesh;
    use nalgebra::Vector3;

    /// Two disjoint labeled boxes merged into one mesh.
    fn two_box_mesh() -> (TriangleMesh, TriangleMesh, TriangleMesh) {
        let a = box_mesh(Vector3::new(0.4, 0.3, 0.1));
        let b = box_mesh(Vector3::new(0.2, 0.2, 0.2)).translated(&Vector3::new(1.0, 0.0, 0.0));
        let mut vertices = a.vertices.clone();
        vertices.extend_from_slice(&b.vertices);
        let mut faces = a.faces.clone();
        faces.extend(b.faces.iter().map(|f| f.map(|i| i + a.vertices.len())));
        let mut labels = vec!["drawer body".to_string(); a.faces.len()];
        labels.extend(vec!["main cabinet".to_string(); b.faces.len()]);
        let merged = TriangleMesh::new(vertices, faces, Some(labels));
        (merged, a, b)
    }

    /// Face sets compared by vertex positions, ignoring indexing.
    fn face_point_set(mesh: &TriangleMesh) -> Vec<[[u64; 3]; 3]> {
        let mut set: Vec<[[u64; 3]; 3]> = mesh
            .faces
            .iter()
            .map(|f| {
                f.map(|i| {
                    let v = mesh.vertices[i];
                    [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()]
                })
            })
            .collect();
        set.sort();
        set
    }

    #[test]
    fn partition_recovers_the_original_boxes() {
        let (merged, a, b) = two_box_mesh();
        let (mobile, base) = partition_mesh(&merged, "drawer body", "main cabinet").unwrap();
        assert_eq!(face_point_set(&mobile), face_point_set(&a));
        assert_eq!(face_point_set(&base), face_point_set(&b));
    }

    #[test]
    fn partition_conserves_faces_and_area() {
        let (merged, _, _) = two_box_mesh();
        let (mobile, base) = partition_mesh(&merged, "drawer body", "main cabinet").unwrap();
        assert_eq!(mobile.faces.len() + base.faces.len(), merged.faces.len());
        let total = mobile.surface_area() + base.surface_area();
        assert!((total - merged.surface_area()).abs() < 1e-12);
    }

    #[test]
    fn absent_label_errors() {
        let (merged, _, _) = two_box_mesh();
        match partition_mesh(&merged, "drawer body", "missing") {
            Err(AssetError::EmptyLabel { label }) => assert_eq!(label, "missing"),
            other => panic!("expected EmptyLabel, got {other:?}"),
        }
    }

    #[test]
    fn unlabeled_mesh_errors() {
        let mesh = box_mesh(Vector3::new(1.0, 1.0, 1.0));
        assert!(matches!(
            partition_mesh(&mesh, "a", "b"),
            Err(AssetError::MissingFaceLabels)
        ));
    }

    #[test]
    fn vertices_are_compacted() {
        let (merged, a, _) = two_box_mesh();
        let (mobile, _) = partition_mesh(&merged, "drawer body", "main cabinet").unwrap();
        assert_eq!(mobile.vertices.len(), a.vertices.len());
    }
}
