//! Contrastive feature training. Blending weights are frozen at their
//! photometric values, so each pixel's rendered feature is a fixed linear
//! map of the per-splat features and only the feature field ever changes.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use r2sim_render::{rasterize_with_contributions, PixelContribution, RenderOptions};
use r2sim_scene::GaussianScene;
use serde::{Deserialize, Serialize};

use crate::error::SemanticError;
use crate::view::SupervisionView;

/// Feature norms below this are treated as unoriented; such pixels carry no
/// gradient and contribute no loss.
const NORM_FLOOR: f64 = 1e-12;

/// Floor on the 1/|F| factor in the cosine gradient. Caps the step size for
/// barely-covered pixels without changing the descent direction.
const GRAD_NORM_FLOOR: f64 = 0.05;

/// Half-width of the seeded uniform initialization. Small against the unit
/// class embeddings so leftover init noise cannot out-vote the trained
/// signal in cosine queries.
const INIT_SCALE: f64 = 0.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureTrainConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    /// Softmax temperature over cosine similarities.
    pub temperature: f64,
    /// Labeled pixels sampled per gradient step (with replacement).
    pub batch_pixels: usize,
    pub seed: u64,
}

impl Default for FeatureTrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            iterations: 500,
            temperature: 0.07,
            batch_pixels: 1024,
            seed: 0,
        }
    }
}

impl FeatureTrainConfig {
    pub fn validate(&self) -> Result<(), SemanticError> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("temperature", self.temperature),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(SemanticError::BadConfig(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.iterations == 0 {
            return Err(SemanticError::BadConfig("iterations must be positive".into()));
        }
        if self.batch_pixels == 0 {
            return Err(SemanticError::BadConfig(
                "batch_pixels must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One trainable pixel: a labeled pixel with at least one contributing splat.
struct TrainPixel {
    view: usize,
    pixel: usize,
    class_row: usize,
}

/// View-independent training setup: class embeddings in label-table order
/// plus frozen per-pixel contributor lists.
struct Prepared {
    /// K×d unit-norm class embeddings, label_table (name-sorted) order.
    embeddings: Vec<Vec<f64>>,
    contribs: Vec<Vec<Vec<PixelContribution>>>,
    pixels: Vec<TrainPixel>,
    /// Splats reachable from at least one labeled pixel. Only these can
    /// receive gradient; the rest keep their input features untouched.
    supervised: Vec<bool>,
}

fn prepare(
    scene: &GaussianScene,
    views: &[SupervisionView],
) -> Result<Prepared, SemanticError> {
    if scene.label_table.is_empty() {
        return Err(SemanticError::EmptyLabelTable);
    }
    let d = scene.feature_dim;
    if d < 2 {
        return Err(SemanticError::DimensionTooSmall(d));
    }
    let mut embeddings = Vec::with_capacity(scene.label_table.len());
    let mut row_of_name = std::collections::BTreeMap::new();
    for (name, embedding) in &scene.label_table {
        if embedding.len() != d {
            return Err(SemanticError::DimensionMismatch {
                scene: d,
                got: embedding.len(),
                what: format!("label {name:?}"),
            });
        }
        let norm = embedding.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(SemanticError::NotUnitNorm {
                name: name.clone(),
                norm,
            });
        }
        row_of_name.insert(name.clone(), embeddings.len());
        embeddings.push(embedding.clone());
    }

    let opts = RenderOptions::default();
    let mut contribs = Vec::with_capacity(views.len());
    let mut pixels = Vec::new();
    let mut supervised = vec![false; scene.splats.len()];
    let mut labeled = 0usize;
    for (v, view) in views.iter().enumerate() {
        view.validate()?;
        let mut row_of_id = std::collections::BTreeMap::new();
        for (id, name) in &view.class_ids {
            let row = row_of_name
                .get(name)
                .ok_or_else(|| SemanticError::UnknownClass { name: name.clone() })?;
            row_of_id.insert(*id, *row);
        }
        let (_, view_contribs) = rasterize_with_contributions(scene, &view.camera, &opts)?;
        for (p, &id) in view.mask.iter().enumerate() {
            if id < 0 {
                continue;
            }
            labeled += 1;
            if view_contribs[p].is_empty() {
                continue;
            }
            for c in &view_contribs[p] {
                supervised[c.splat_index as usize] = true;
            }
            pixels.push(TrainPixel {
                view: v,
                pixel: p,
                class_row: row_of_id[&id],
            });
        }
        contribs.push(view_contribs);
    }
    if labeled == 0 || pixels.is_empty() {
        if labeled > 0 {
            log::warn!("all {labeled} labeled pixels fall outside splat coverage");
        }
        return Err(SemanticError::ZeroLabeledPixels { views: views.len() });
    }
    Ok(Prepared {
        embeddings,
        contribs,
        pixels,
        supervised,
    })
}

fn blended_feature(
    contribs: &[PixelContribution],
    features: &[f64],
    d: usize,
    out: &mut [f64],
) {
    out.fill(0.0);
    for c in contribs {
        let f = &features[c.splat_index as usize * d..(c.splat_index as usize + 1) * d];
        for (o, fv) in out.iter_mut().zip(f) {
            *o += c.weight * fv;
        }
    }
}

/// Per-pixel loss and, when `grad` is given, the gradient with respect to
/// the blended feature, accumulated into the per-splat buffer.
fn pixel_loss(
    prepared: &Prepared,
    pixel: &TrainPixel,
    features: &[f64],
    d: usize,
    temperature: f64,
    scratch: &mut [f64],
    grad: Option<&mut [f64]>,
) -> Option<f64> {
    let contribs = &prepared.contribs[pixel.view][pixel.pixel];
    blended_feature(contribs, features, d, scratch);
    let norm = scratch.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < NORM_FLOOR {
        return None;
    }
    let k = prepared.embeddings.len();
    // Logits s_k = cos(F, e_k) / tau with unit e_k.
    let mut logits = vec![0.0; k];
    for (s, e) in logits.iter_mut().zip(&prepared.embeddings) {
        *s = scratch.iter().zip(e).map(|(a, b)| a * b).sum::<f64>() / (norm * temperature);
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum_exp: f64 = logits.iter().map(|s| (s - max).exp()).sum();
    let log_z = max + sum_exp.ln();
    let loss = log_z - logits[pixel.class_row];

    if let Some(grad) = grad {
        // dL/du = (1/tau) * sum_k (p_k - delta_ky) e_k, u = F/|F|;
        // dL/dF = (dL/du - u (u . dL/du)) / |F|.
        let mut g_u = vec![0.0; d];
        for (row, e) in prepared.embeddings.iter().enumerate() {
            let p = (logits[row] - log_z).exp();
            let coeff = (p - if row == pixel.class_row { 1.0 } else { 0.0 }) / temperature;
            for (g, ev) in g_u.iter_mut().zip(e) {
                *g += coeff * ev;
            }
        }
        let u_dot: f64 = g_u
            .iter()
            .zip(scratch.iter())
            .map(|(g, f)| g * f / norm)
            .sum();
        let step_norm = norm.max(GRAD_NORM_FLOOR);
        for (g, f) in g_u.iter_mut().zip(scratch.iter()) {
            *g = (*g - f / norm * u_dot) / step_norm;
        }
        for c in contribs {
            let o = c.splat_index as usize * d;
            for (j, g) in g_u.iter().enumerate() {
                grad[o + j] += c.weight * g;
            }
        }
    }
    Some(loss)
}

/// Mean contrastive loss over all labeled, splat-covered pixels of `views`,
/// evaluated with the scene's current features.
pub fn evaluate_loss(
    scene: &GaussianScene,
    views: &[SupervisionView],
) -> Result<f64, SemanticError> {
    evaluate_loss_with_temperature(scene, views, FeatureTrainConfig::default().temperature)
}

pub fn evaluate_loss_with_temperature(
    scene: &GaussianScene,
    views: &[SupervisionView],
    temperature: f64,
) -> Result<f64, SemanticError> {
    let prepared = prepare(scene, views)?;
    let d = scene.feature_dim;
    let features: Vec<f64> = scene
        .splats
        .iter()
        .flat_map(|s| s.feature.iter().copied())
        .collect();
    let mut scratch = vec![0.0; d];
    let mut total = 0.0;
    let mut counted = 0usize;
    for pixel in &prepared.pixels {
        if let Some(loss) =
            pixel_loss(&prepared, pixel, &features, d, temperature, &mut scratch, None)
        {
            total += loss;
            counted += 1;
        }
    }
    if counted == 0 {
        return Err(SemanticError::ZeroLabeledPixels { views: views.len() });
    }
    Ok(total / counted as f64)
}

/// Trains per-splat features by SGD on the softmax-over-classes cosine loss.
/// Geometry, opacity, and SH fields are returned bit-equal to the input;
/// only features move. A scene whose features are all exactly zero gets a
/// small seeded random initialization on the splats supervision can reach
/// (an all-zero field has no gradient direction); splats outside every
/// labeled pixel's contributor list keep their input features.
pub fn train_features(
    scene: &GaussianScene,
    views: &[SupervisionView],
    cfg: &FeatureTrainConfig,
) -> Result<GaussianScene, SemanticError> {
    cfg.validate()?;
    let prepared = prepare(scene, views)?;
    let d = scene.feature_dim;
    let n = scene.splats.len();

    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut features: Vec<f64> = scene
        .splats
        .iter()
        .flat_map(|s| s.feature.iter().copied())
        .collect();
    if features.iter().all(|&v| v == 0.0) {
        // Only supervised splats get the random start: a splat no labeled
        // pixel can see would keep its random vector forever and pollute
        // extraction, while a zero vector matches no class. The scale is
        // deliberately small so the trained signal dominates cosine queries.
        log::info!("scene features are all zero; drawing seeded random initialization");
        for (i, on) in prepared.supervised.iter().enumerate() {
            if *on {
                for f in &mut features[i * d..(i + 1) * d] {
                    *f = rng.random_range(-INIT_SCALE..INIT_SCALE);
                }
            }
        }
    }

    let mut grad = vec![0.0; n * d];
    let mut scratch = vec![0.0; d];
    for _ in 0..cfg.iterations {
        grad.fill(0.0);
        for _ in 0..cfg.batch_pixels {
            let pick = rng.random_range(0..prepared.pixels.len());
            pixel_loss(
                &prepared,
                &prepared.pixels[pick],
                &features,
                d,
                cfg.temperature,
                &mut scratch,
                Some(&mut grad),
            );
        }
        let step = cfg.learning_rate / cfg.batch_pixels as f64;
        for (f, g) in features.iter_mut().zip(&grad) {
            *f -= step * g;
        }
    }

    let mut out = scene.clone();
    for (i, splat) in out.splats.iter_mut().enumerate() {
        splat.feature.copy_from_slice(&features[i * d..(i + 1) * d]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use r2sim_scene::{CameraModel, GaussianSplat, RigidTransform};

    fn one_splat_scene() -> GaussianScene {
        let mut splat = GaussianSplat::zeroed(0, 4);
        splat.position = nalgebra::Vector3::new(0.0, 0.0, 2.0);
        splat.log_scale = nalgebra::Vector3::repeat((0.1f64).ln());
        splat.opacity_logit = 4.0;
        splat.feature = vec![1.0, 0.0, 0.0, 0.0];
        let mut scene = GaussianScene::new(vec![splat], 0, 4);
        scene
            .label_table
            .insert("a".into(), vec![1.0, 0.0, 0.0, 0.0]);
        scene
            .label_table
            .insert("b".into(), vec![0.0, 1.0, 0.0, 0.0]);
        scene
    }

    fn center_camera() -> CameraModel {
        CameraModel {
            fx: 30.0,
            fy: 30.0,
            cx: 7.5,
            cy: 7.5,
            width: 16,
            height: 16,
            world_to_camera: RigidTransform::identity(),
        }
    }

    fn full_mask(camera: &CameraModel, id: i32) -> Vec<i32> {
        vec![id; (camera.width * camera.height) as usize]
    }

    #[test]
    fn unlabeled_only_masks_error_with_zero_labeled_pixels() {
        let scene = one_splat_scene();
        let camera = center_camera();
        let view = SupervisionView {
            mask: full_mask(&camera, -1),
            camera,
            class_ids: BTreeMap::new(),
        };
        let err = train_features(&scene, &[view], &FeatureTrainConfig::default()).unwrap_err();
        assert!(err.to_string().contains("zero labeled pixels"), "{err}");
    }

    #[test]
    fn empty_label_table_is_rejected() {
        let mut scene = one_splat_scene();
        scene.label_table.clear();
        let camera = center_camera();
        let view = SupervisionView {
            mask: full_mask(&camera, 0),
            camera,
            class_ids: BTreeMap::from([(0, "a".to_string())]),
        };
        assert!(matches!(
            train_features(&scene, &[view], &FeatureTrainConfig::default()).unwrap_err(),
            SemanticError::EmptyLabelTable
        ));
    }

    #[test]
    fn embedding_dimension_mismatch_is_rejected() {
        let mut scene = one_splat_scene();
        scene.label_table.insert("c".into(), vec![1.0, 0.0]);
        let camera = center_camera();
        let view = SupervisionView {
            mask: full_mask(&camera, 0),
            camera,
            class_ids: BTreeMap::from([(0, "a".to_string())]),
        };
        assert!(matches!(
            train_features(&scene, &[view], &FeatureTrainConfig::default()).unwrap_err(),
            SemanticError::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn non_unit_embeddings_are_rejected() {
        let mut scene = one_splat_scene();
        scene.label_table.insert("b".into(), vec![0.0, 2.0, 0.0, 0.0]);
        let camera = center_camera();
        let view = SupervisionView {
            mask: full_mask(&camera, 0),
            camera,
            class_ids: BTreeMap::from([(0, "a".to_string())]),
        };
        assert!(matches!(
            train_features(&scene, &[view], &FeatureTrainConfig::default()).unwrap_err(),
            SemanticError::NotUnitNorm { .. }
        ));
    }

    #[test]
    fn optimal_features_are_stationary_as_lr_vanishes() {
        // Features equal the target embedding, so every covered pixel is at
        // the per-pixel optimum (cos = 1) and tiny steps stay put.
        let scene = one_splat_scene();
        let camera = center_camera();
        let view = SupervisionView {
            mask: full_mask(&camera, 0),
            camera,
            class_ids: BTreeMap::from([(0, "a".to_string())]),
        };
        let base = evaluate_loss(&scene, &[view.clone()]).unwrap();

        // Any perturbed feature set has loss at or above the optimum.
        let mut perturbed = scene.clone();
        perturbed.splats[0].feature = vec![0.8, 0.4, -0.2, 0.1];
        let worse = evaluate_loss(&perturbed, &[view.clone()]).unwrap();
        assert!(worse + 1e-12 >= base, "worse={worse} base={base}");

        let cfg = FeatureTrainConfig {
            learning_rate: 1e-9,
            iterations: 1,
            ..Default::default()
        };
        let trained = train_features(&scene, &[view], &cfg).unwrap();
        for (a, b) in trained.splats[0]
            .feature
            .iter()
            .zip(&scene.splats[0].feature)
        {
            assert!((a - b).abs() < 1e-6, "feature moved by {}", (a - b).abs());
        }
    }

    #[test]
    fn training_touches_only_features() {
        let mut scene = one_splat_scene();
        scene.splats[0].feature = vec![0.1, -0.3, 0.2, 0.05];
        let camera = center_camera();
        let view = SupervisionView {
            mask: full_mask(&camera, 0),
            camera,
            class_ids: BTreeMap::from([(0, "a".to_string())]),
        };
        let cfg = FeatureTrainConfig {
            iterations: 20,
            batch_pixels: 64,
            ..Default::default()
        };
        let trained = train_features(&scene, &[view], &cfg).unwrap();
        let (a, b) = (&scene.splats[0], &trained.splats[0]);
        assert_eq!(a.position, b.position);
        assert_eq!(a.rotation, b.rotation);
        assert_eq!(a.log_scale, b.log_scale);
        assert!(a.opacity_logit.to_bits() == b.opacity_logit.to_bits());
        assert_eq!(a.sh_coeffs, b.sh_coeffs);
        assert!(a.feature != b.feature, "features should have moved");
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = FeatureTrainConfig {
            temperature: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = FeatureTrainConfig {
            iterations: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
