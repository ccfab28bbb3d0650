//! Class queries against a trained feature field: 2D masks from rendered
//! feature maps and 3D splat extraction from per-splat features.

use nalgebra::Vector3;
use r2sim_render::{rasterize, RenderOptions};
use r2sim_scene::{CameraModel, GaussianScene};

use crate::error::SemanticError;

/// Guard against 0/0; a zero-norm feature gets cosine 0 to every class.
fn cosine(feature: &[f64], embedding: &[f64]) -> f64 {
    let dot: f64 = feature.iter().zip(embedding).map(|(a, b)| a * b).sum();
    let norm = feature.iter().map(|v| v * v).sum::<f64>().sqrt();
    dot / (norm + 1e-30)
}

fn class_embedding<'s>(
    scene: &'s GaussianScene,
    class_name: &str,
) -> Result<&'s [f64], SemanticError> {
    let embedding = scene
        .label_table
        .get(class_name)
        .ok_or_else(|| SemanticError::UnknownClass {
            name: class_name.to_string(),
        })?;
    if embedding.len() != scene.feature_dim {
        return Err(SemanticError::DimensionMismatch {
            scene: scene.feature_dim,
            got: embedding.len(),
            what: format!("label {class_name:?}"),
        });
    }
    Ok(embedding)
}

/// Row-major H×W mask: true where the rendered feature points at the class
/// (cosine at or above `threshold`) and the pixel is solidly covered
/// (alpha > 0.5).
pub fn query_mask(
    scene: &GaussianScene,
    camera: &CameraModel,
    class_name: &str,
    threshold: f64,
) -> Result<Vec<bool>, SemanticError> {
    let embedding = class_embedding(scene, class_name)?;
    let opts = RenderOptions {
        render_features: true,
        ..RenderOptions::default()
    };
    let out = rasterize(scene, camera, &opts)?;
    let d = scene.feature_dim;
    let feature = out.feature.as_ref().expect("features were requested");
    let mask = (0..out.width * out.height)
        .map(|p| {
            out.alpha[p] > 0.5 && cosine(&feature[p * d..(p + 1) * d], embedding) >= threshold
        })
        .collect();
    Ok(mask)
}

/// Indices and world positions of splats whose own feature points at the
/// class. An empty selection is a valid result.
pub fn extract_splats_by_class(
    scene: &GaussianScene,
    class_name: &str,
    threshold: f64,
) -> Result<(Vec<usize>, Vec<Vector3<f64>>), SemanticError> {
    let embedding = class_embedding(scene, class_name)?;
    let mut indices = Vec::new();
    let mut positions = Vec::new();
    for (i, splat) in scene.splats.iter().enumerate() {
        if cosine(&splat.feature, embedding) >= threshold {
            indices.push(i);
            positions.push(splat.position);
        }
    }
    Ok((indices, positions))
}
