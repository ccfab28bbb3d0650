use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};

use crate::error::AssetError;
use crate::mesh::TriangleMesh;

#[derive(Debug, Clone, PartialEq)]
pub struct MassProperties {
    /// m³
    pub volume: f64,
    /// kg
    pub mass: f64,
    /// meters, same frame as the mesh
    pub center_of_mass: Vector3<f64>,
    /// kg·m², about the center of mass, axes parallel to the mesh frame
    pub inertia: Matrix3<f64>,
}

/// Checks that every edge is shared by exactly two faces with opposite
/// orientation, which is what the signed-tetrahedron integrals require.
pub fn check_watertight(mesh: &TriangleMesh) -> Result<(), AssetError> {
    // Keyed by undirected edge (lo, hi); counts (lo→hi, hi→lo) traversals.
    let mut edges: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
    for f in &mesh.faces {
        for k in 0..3 {
            let a = f[k];
            let b = f[(k + 1) % 3];
            let entry = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    for (&(a, b), &(fwd, bwd)) in &edges {
        if fwd != 1 || bwd != 1 {
            return Err(AssetError::NotWatertight {
                reason: format!(
                    "edge ({a}, {b}) is traversed {fwd}x forward and {bwd}x backward"
                ),
            });
        }
    }
    Ok(())
}

// Moments of the canonical tetrahedron (0, e1, e2, e3), volume 1/6:
// ∫ xᵢ dV = 1/24, ∫ xᵢ² dV = 1/60, ∫ xᵢxⱼ dV = 1/120.
fn canonical_second_moment() -> Matrix3<f64> {
    let d = 1.0 / 60.0;
    let o = 1.0 / 120.0;
    Matrix3::new(d, o, o, o, d, o, o, o, d)
}

/// Volume, mass, center of mass, and COM-frame inertia of a watertight mesh
/// with uniform density, via signed tetrahedra against the origin.
///
/// An inward-oriented mesh (negative enclosed volume) is corrected by a
/// global orientation flip and a warning rather than an error.
pub fn mass_properties(mesh: &TriangleMesh, density: f64) -> Result<MassProperties, AssetError> {
    mesh.validate()?;
    if !density.is_finite() || density <= 0.0 {
        return Err(AssetError::PhysicsRange {
            field: "density",
            value: density,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    check_watertight(mesh)?;

    let canon = canonical_second_moment();
    let mut volume = 0.0;
    let mut first = Vector3::zeros();
    let mut second = Matrix3::zeros();
    for f in &mesh.faces {
        let a = mesh.vertices[f[0]];
        let b = mesh.vertices[f[1]];
        let c = mesh.vertices[f[2]];
        let m = Matrix3::from_columns(&[a, b, c]);
        let det = m.determinant();
        volume += det / 6.0;
        first += det / 24.0 * (a + b + c);
        second += det * m * canon * m.transpose();
    }

    if volume < 0.0 {
        log::warn!(
            "mesh is inward-oriented (volume {volume:.6e}); flipping orientation"
        );
        volume = -volume;
        first = -first;
        second = -second;
    }
    if volume == 0.0 {
        return Err(AssetError::InvalidMesh {
            reason: "mesh encloses zero volume".into(),
        });
    }

    let mass = density * volume;
    let com = first / volume;
    // Inertia about the origin from the second moment, then the parallel-axis
    // shift down to the COM.
    let i_origin = density * (Matrix3::identity() * second.trace() - second);
    let r2 = com.norm_squared();
    let i_com = i_origin - mass * (Matrix3::identity() * r2 - com * com.transpose());

    Ok(MassProperties {
        volume,
        mass,
        center_of_mass: com,
        inertia: i_com,
    })
}

/// Fallback for non-watertight parts: treat the bounding box as a solid of
/// the given density.
pub fn bbox_mass_properties(
    mesh: &TriangleMesh,
    density: f64,
) -> Result<MassProperties, AssetError> {
    mesh.validate()?;
    if !density.is_finite() || density <= 0.0 {
        return Err(AssetError::PhysicsRange {
            field: "density",
            value: density,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let (lo, hi) = mesh.bounding_box();
    let ext = hi - lo;
    let volume = ext.x * ext.y * ext.z;
    if volume <= 0.0 {
        return Err(AssetError::InvalidMesh {
            reason: "degenerate bounding box".into(),
        });
    }
    let mass = density * volume;
    let inertia = Matrix3::from_diagonal(&Vector3::new(
        mass / 12.0 * (ext.y * ext.y + ext.z * ext.z),
        mass / 12.0 * (ext.x * ext.x + ext.z * ext.z),
        mass / 12.0 * (ext.x * ext.x + ext.y * ext.y),
    ));
    Ok(MassProperties {
        volume,
        mass,
        center_of_mass: 0.5 * (lo + hi),
        inertia,
    })
}
