use std::collections::HashMap;

use nalgebra::Vector3;

use crate::mesh::TriangleMesh;

/// Axis-aligned box centered at the origin; `extents` are full side lengths.
pub fn box_mesh(extents: Vector3<f64>) -> TriangleMesh {
    let h = 0.5 * extents;
    let vertices = vec![
        Vector3::new(-h.x, -h.y, -h.z),
        Vector3::new(h.x, -h.y, -h.z),
        Vector3::new(h.x, h.y, -h.z),
        Vector3::new(-h.x, h.y, -h.z),
        Vector3::new(-h.x, -h.y, h.z),
        Vector3::new(h.x, -h.y, h.z),
        Vector3::new(h.x, h.y, h.z),
        Vector3::new(-h.x, h.y, h.z),
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [3, 7, 6],
        [3, 6, 2],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriangleMesh::new(vertices, faces, None)
}

/// Unit icosahedron subdivided `subdivisions` times, vertices projected to
/// `radius`. 20·4ⁿ faces, outward-oriented, watertight.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let mut vertices: Vec<Vector3<f64>> = raw
        .iter()
        .map(|&(x, y, z)| Vector3::new(x, y, z).normalize() * radius)
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vector3<f64>>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = (vertices[a] + vertices[b]).normalize() * radius;
                vertices.push(m);
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    TriangleMesh::new(vertices, faces, None)
}

/// Closed cylinder centered at the origin, axis +z.
pub fn cylinder_mesh(radius: f64, height: f64, segments: usize) -> TriangleMesh {
    assert!(segments >= 3);
    let h = 0.5 * height;
    let mut vertices = Vec::with_capacity(2 * segments + 2);
    for &z in &[-h, h] {
        for i in 0..segments {
            let a = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
            vertices.push(Vector3::new(radius * a.cos(), radius * a.sin(), z));
        }
    }
    let bottom_center = vertices.len();
    vertices.push(Vector3::new(0.0, 0.0, -h));
    let top_center = vertices.len();
    vertices.push(Vector3::new(0.0, 0.0, h));

    let mut faces = Vec::with_capacity(4 * segments);
    for i in 0..segments {
        let j = (i + 1) % segments;
        let (b0, b1) = (i, j);
        let (t0, t1) = (segments + i, segments + j);
        faces.push([b0, b1, t1]);
        faces.push([b0, t1, t0]);
        faces.push([bottom_center, b1, b0]);
        faces.push([top_center, t0, t1]);
    }
    TriangleMesh::new(vertices, faces, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mass::check_watertight;

    #[test]
    fn primitives_are_watertight() {
        check_watertight(&box_mesh(Vector3::new(1.0, 2.0, 3.0))).unwrap();
        check_watertight(&icosphere(0.5, 2)).unwrap();
        check_watertight(&cylinder_mesh(0.3, 1.0, 16)).unwrap();
    }

    #[test]
    fn icosphere_vertices_lie_on_the_sphere() {
        let s = icosphere(0.25, 3);
        assert_eq!(s.faces.len(), 20 * 4usize.pow(3));
        for v in &s.vertices {
            assert!((v.norm() - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn cylinder_face_count() {
        let c = cylinder_mesh(0.1, 0.4, 12);
        assert_eq!(c.faces.len(), 4 * 12);
        c.validate().unwrap();
    }
}
