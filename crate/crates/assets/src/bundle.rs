use std::fs;
use std::path::{Path, PathBuf};

use crate::asset::InteractiveAsset;
use crate::error::{io, AssetError};
use crate::mesh::save_mesh;
use crate::urdf::{build_urdf, link_name};

/// Writes `out_dir/{name}/model.urdf`, `meshes/*.obj` (one per part), and
/// `physics.json`, returning the bundle directory.
pub fn write_asset_bundle(
    asset: &InteractiveAsset,
    name: &str,
    out_dir: &Path,
) -> Result<PathBuf, AssetError> {
    let urdf = build_urdf(asset, name)?;

    let root = out_dir.join(name);
    let mesh_dir = root.join("meshes");
    fs::create_dir_all(&mesh_dir).map_err(|e| io(&mesh_dir, e))?;

    let urdf_path = root.join("model.urdf");
    fs::write(&urdf_path, urdf).map_err(|e| io(&urdf_path, e))?;

    for (label, mesh) in &asset.parts {
        let path = mesh_dir.join(format!("{}.obj", link_name(label)));
        save_mesh(mesh, &path)?;
    }

    let physics_path = root.join("physics.json");
    let json = serde_json::to_string_pretty(&asset.physics).map_err(|e| AssetError::Json {
        path: physics_path.clone(),
        source: e,
    })?;
    fs::write(&physics_path, json).map_err(|e| io(&physics_path, e))?;

    Ok(root)
}
