use std::collections::BTreeMap;

use crate::error::AssetError;
use crate::mass::{bbox_mass_properties, mass_properties, MassProperties};
use crate::mesh::TriangleMesh;
use crate::physics::{ArticulationSpec, PhysicsProperties};

/// A simulation-ready object: labeled part meshes, bulk physics, an optional
/// single joint, and per-part mass properties.
#[derive(Debug, Clone)]
pub struct InteractiveAsset {
    pub parts: BTreeMap<String, TriangleMesh>,
    pub physics: PhysicsProperties,
    pub articulation: Option<ArticulationSpec>,
    pub mass: BTreeMap<String, MassProperties>,
}

impl InteractiveAsset {
    /// Builds the asset and computes per-part mass from the density. Parts
    /// that are not watertight fall back to bounding-box volume with a
    /// warning instead of failing.
    pub fn assemble(
        parts: BTreeMap<String, TriangleMesh>,
        physics: PhysicsProperties,
        articulation: Option<ArticulationSpec>,
    ) -> Result<Self, AssetError> {
        physics.validate()?;
        if let Some(spec) = &articulation {
            spec.validate()?;
        }
        let mut mass = BTreeMap::new();
        for (label, mesh) in &parts {
            let props = match mass_properties(mesh, physics.density) {
                Ok(p) => p,
                Err(AssetError::NotWatertight { reason }) => {
                    log::warn!(
                        "part {label:?} is not watertight ({reason}); \
                         falling back to bounding-box mass"
                    );
                    bbox_mass_properties(mesh, physics.density)?
                }
                Err(e) => return Err(e),
            };
            mass.insert(label.clone(), props);
        }
        let asset = Self {
            parts,
            physics,
            articulation,
            mass,
        };
        asset.validate()?;
        Ok(asset)
    }

    pub fn validate(&self) -> Result<(), AssetError> {
        if self.parts.is_empty() {
            return Err(AssetError::InvalidAsset {
                reason: "asset has no parts".into(),
            });
        }
        self.physics.validate()?;
        for (label, mesh) in &self.parts {
            mesh.validate()?;
            if !self.mass.contains_key(label) {
                return Err(AssetError::InvalidAsset {
                    reason: format!("part {label:?} has no mass properties"),
                });
            }
        }
        if let Some(spec) = &self.articulation {
            spec.validate()?;
            for label in [&spec.mobile_label, &spec.base_label] {
                if !self.parts.contains_key(label) {
                    return Err(AssetError::InvalidAsset {
                        reason: format!("articulation references missing part {label:?}"),
                    });
                }
            }
        }
        Ok(())
    }
}
