//! Interactive-asset construction: triangle meshes with per-face part labels,
//! mass properties from estimated density, labeled-part partitioning, and
//! URDF emission of articulated objects.
//!
//! Meshes live in a right-handed metric frame; faces are outward-oriented
//! counter-clockwise triangles. Mass integrals assume watertight parts and
//! fall back to bounding-box volumes (with a warning) when a scanned shell
//! is open.

mod asset;
mod bundle;
mod error;
mod mass;
mod mesh;
mod partition;
mod physics;
mod primitives;
mod urdf;

pub use asset::InteractiveAsset;
pub use bundle::write_asset_bundle;
pub use error::AssetError;
pub use mass::{bbox_mass_properties, check_watertight, mass_properties, MassProperties};
pub use mesh::{label_set, load_mesh, save_mesh, TriangleMesh};
pub use partition::partition_mesh;
pub use physics::{ArticulationSpec, JointType, PhysicsProperties};
pub use primitives::{box_mesh, cylinder_mesh, icosphere};
pub use urdf::{build_urdf, fmt_urdf_float, link_name, mesh_path, RESERVED_LINK_NAMES};
