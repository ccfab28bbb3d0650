use std::collections::BTreeMap;

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use crate::{RigidTransform, SceneError};

/// One anisotropic Gaussian primitive.
///
/// Quaternions are stored `(w, x, y, z)` exactly as they appear in splat
/// files; [`GaussianSplat::unit_rotation`] normalizes at the point of use so
/// that untouched splats round-trip through PLY bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSplat {
    /// World-frame mean, meters.
    pub position: Vector3<f64>,
    /// Unit quaternion `(w, x, y, z)`.
    pub rotation: [f64; 4],
    /// Log of the per-axis standard deviations, log-meters.
    pub log_scale: Vector3<f64>,
    /// Opacity before the sigmoid.
    pub opacity_logit: f64,
    /// `(L+1)²` spherical-harmonic coefficients, RGB triple per coefficient.
    pub sh_coeffs: Vec<[f64; 3]>,
    /// Semantic embedding, `d` entries (empty when the scene carries none).
    pub feature: Vec<f64>,
}

impl GaussianSplat {
    /// A splat at the origin with identity rotation, unit scale, opacity
    /// logit 0, black degree-`sh_degree` color, and a zero feature vector.
    pub fn zeroed(sh_degree: usize, feature_dim: usize) -> Self {
        GaussianSplat {
            position: Vector3::zeros(),
            rotation: [1.0, 0.0, 0.0, 0.0],
            log_scale: Vector3::zeros(),
            opacity_logit: 0.0,
            sh_coeffs: vec![[0.0; 3]; (sh_degree + 1) * (sh_degree + 1)],
            feature: vec![0.0; feature_dim],
        }
    }

    /// The stored rotation, normalized. Unit within 1e-9 by construction.
    pub fn unit_rotation(&self) -> UnitQuaternion<f64> {
        let [w, x, y, z] = self.rotation;
        UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(w, x, y, z))
    }

    /// Rotation matrix of the stored quaternion.
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.unit_rotation().to_rotation_matrix().into_inner()
    }

    /// `sigmoid(opacity_logit)`, always in (0, 1).
    pub fn opacity(&self) -> f64 {
        sigmoid(self.opacity_logit)
    }

    /// Per-axis standard deviations `exp(log_scale)`.
    pub fn scale(&self) -> Vector3<f64> {
        self.log_scale.map(f64::exp)
    }

    /// 3D covariance `Σ = R · diag(exp(log_scale))² · Rᵀ`.
    pub fn covariance3d(&self) -> Matrix3<f64> {
        let r = self.rotation_matrix();
        let s = self.scale();
        let d = Matrix3::from_diagonal(&Vector3::new(s[0] * s[0], s[1] * s[1], s[2] * s[2]));
        r * d * r.transpose()
    }

    fn validate(&self, index: usize, sh_degree: usize, feature_dim: usize) -> Result<(), SceneError> {
        let invalid = |reason: String| SceneError::InvalidSplat { index, reason };
        if !self.position.iter().all(|v| v.is_finite()) {
            return Err(invalid("non-finite position".into()));
        }
        let qn = self.rotation.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !qn.is_finite() || qn < 1e-12 {
            return Err(invalid(format!("degenerate quaternion norm {qn:e}")));
        }
        if !self.log_scale.iter().all(|v| v.is_finite()) {
            return Err(invalid("non-finite log_scale".into()));
        }
        if !self.opacity_logit.is_finite() {
            return Err(invalid("non-finite opacity logit".into()));
        }
        let want_sh = (sh_degree + 1) * (sh_degree + 1);
        if self.sh_coeffs.len() != want_sh {
            return Err(invalid(format!(
                "{} SH coefficients, scene degree {} needs {}",
                self.sh_coeffs.len(),
                sh_degree,
                want_sh
            )));
        }
        if self.feature.len() != feature_dim {
            return Err(invalid(format!(
                "feature length {} != scene feature_dim {}",
                self.feature.len(),
                feature_dim
            )));
        }
        Ok(())
    }
}

/// How `transform_scene` treats spherical-harmonic degrees ≥ 2, which have
/// no exact cheap rotation here. Degrees 0 and 1 always rotate exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShRotation {
    /// Drop all coefficients above degree 1.
    TruncateAboveDegree1,
    /// Keep the higher-degree coefficients unrotated and log a warning.
    #[default]
    KeepUnrotated,
}

/// A full splat scene plus its label table of class-name → target embedding.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GaussianScene {
    pub splats: Vec<GaussianSplat>,
    /// Spherical-harmonic degree `L`, shared by every splat.
    pub sh_degree: usize,
    /// Semantic feature dimension `d`, shared by every splat.
    pub feature_dim: usize,
    /// Class name → unit-norm target embedding of length `feature_dim`.
    pub label_table: BTreeMap<String, Vec<f64>>,
}

impl GaussianScene {
    pub fn new(splats: Vec<GaussianSplat>, sh_degree: usize, feature_dim: usize) -> Self {
        GaussianScene {
            splats,
            sh_degree,
            feature_dim,
            label_table: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.splats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splats.is_empty()
    }

    /// Checks per-splat shape invariants and label-table consistency.
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.sh_degree > 3 {
            return Err(SceneError::InvalidScene(format!(
                "sh_degree {} above the supported maximum 3",
                self.sh_degree
            )));
        }
        for (i, s) in self.splats.iter().enumerate() {
            s.validate(i, self.sh_degree, self.feature_dim)?;
        }
        for (class, emb) in &self.label_table {
            if emb.len() != self.feature_dim {
                return Err(SceneError::InvalidLabel {
                    class: class.clone(),
                    reason: format!(
                        "embedding length {} != feature_dim {}",
                        emb.len(),
                        self.feature_dim
                    ),
                });
            }
            let norm = emb.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(SceneError::InvalidLabel {
                    class: class.clone(),
                    reason: format!("embedding norm {norm} not unit within 1e-6"),
                });
            }
        }
        Ok(())
    }
}

/// Maps a scene into a new frame: positions by `T`, splat orientations
/// left-composed with `T`'s rotation, degree-1 SH rotated as vectors.
/// Degree-0 coefficients are view-independent and stay untouched; degrees ≥ 2
/// follow `sh_mode`.
pub fn transform_scene(
    scene: &GaussianScene,
    t: &RigidTransform,
    sh_mode: ShRotation,
) -> GaussianScene {
    let tq = UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(
        t.rotation,
    ));
    let t_quat = [tq.w, tq.i, tq.j, tq.k];
    let truncate = matches!(sh_mode, ShRotation::TruncateAboveDegree1) && scene.sh_degree >= 2;
    if scene.sh_degree >= 2 && !truncate {
        log::warn!(
            "transform_scene: leaving SH degrees ≥ 2 unrotated ({} coefficient bands)",
            (scene.sh_degree + 1) * (scene.sh_degree + 1) - 4
        );
    }
    let out_degree = if truncate { 1 } else { scene.sh_degree };
    let splats = scene
        .splats
        .iter()
        .map(|s| {
            let q = quat_mul(&t_quat, &s.rotation);
            let mut sh = s.sh_coeffs.clone();
            if truncate {
                sh.truncate(4);
            }
            if out_degree >= 1 {
                rotate_sh_degree1(&t.rotation, &mut sh);
            }
            GaussianSplat {
                position: t.apply(&s.position),
                rotation: q,
                log_scale: s.log_scale,
                opacity_logit: s.opacity_logit,
                sh_coeffs: sh,
                feature: s.feature.clone(),
            }
        })
        .collect();
    GaussianScene {
        splats,
        sh_degree: out_degree,
        feature_dim: scene.feature_dim,
        label_table: scene.label_table.clone(),
    }
}

/// Hamilton product on raw `(w, x, y, z)` components. Exact when either
/// factor is the exact identity, which keeps identity transforms bitwise
/// no-ops on splat orientations.
fn quat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Rotate the degree-1 band in place. The three coefficients `(m=-1, 0, 1)`
/// weight the direction components `(y, z, x)` up to shared sign/constant, so
/// they transform as the vector `v = (−c₁, −c₋₁, c₀)`.
fn rotate_sh_degree1(r: &Matrix3<f64>, sh: &mut [[f64; 3]]) {
    if sh.len() < 4 {
        return;
    }
    for ch in 0..3 {
        let v = Vector3::new(-sh[3][ch], -sh[1][ch], sh[2][ch]);
        let v = r * v;
        sh[1][ch] = -v[1];
        sh[2][ch] = v[2];
        sh[3][ch] = -v[0];
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn covariance_identity_case() {
        let s = GaussianSplat::zeroed(0, 0);
        let cov = s.covariance3d();
        assert!((cov - Matrix3::identity()).norm() < 1e-12);
    }

    #[test]
    fn covariance_diagonal_case() {
        let mut s = GaussianSplat::zeroed(0, 0);
        s.log_scale = Vector3::new(2f64.ln(), 0.0, 0.0);
        let cov = s.covariance3d();
        let expect = Matrix3::from_diagonal(&Vector3::new(4.0, 1.0, 1.0));
        assert!((cov - expect).norm() < 1e-12);
    }

    #[test]
    fn covariance_matches_explicit_triple_product() {
        // Oracle: quaternion → matrix by the textbook formula, then R D Rᵀ.
        let q = [0.3, -0.5, 0.7, 0.2];
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        let r = Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        );
        let ls = Vector3::new(-0.3, 0.25, 0.6);
        let e = ls.map(f64::exp);
        let d = Matrix3::from_diagonal(&Vector3::new(e[0] * e[0], e[1] * e[1], e[2] * e[2]));
        let expect = r * d * r.transpose();

        let mut s = GaussianSplat::zeroed(0, 0);
        s.rotation = q;
        s.log_scale = ls;
        assert!((s.covariance3d() - expect).norm() < 1e-12);
    }

    #[test]
    fn covariance_eigenvalues_are_squared_scales() {
        let mut s = GaussianSplat::zeroed(0, 0);
        s.rotation = [0.9, 0.1, -0.3, 0.28];
        s.log_scale = Vector3::new(-1.0, 0.2, 0.9);
        let cov = s.covariance3d();
        let mut eig: Vec<f64> = cov.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = s.scale().iter().map(|v| v * v).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn transform_identity_is_noop() {
        let mut scene = GaussianScene::new(vec![GaussianSplat::zeroed(1, 2)], 1, 2);
        scene.splats[0].position = Vector3::new(0.4, -0.2, 1.0);
        scene.splats[0].sh_coeffs[1] = [0.3, -0.6, 0.1];
        scene.splats[0].rotation = [0.6, 0.64, 0.32, 0.35];
        let out = transform_scene(&scene, &RigidTransform::identity(), ShRotation::default());
        assert_eq!(out, scene);
    }

    #[test]
    fn pure_translation_touches_positions_only() {
        let mut scene = GaussianScene::new(vec![GaussianSplat::zeroed(1, 0)], 1, 0);
        scene.splats[0].sh_coeffs[2] = [0.5, 0.5, 0.5];
        let t = RigidTransform::from_translation(Vector3::new(0.1, 0.0, 0.0));
        let out = transform_scene(&scene, &t, ShRotation::default());
        assert_eq!(out.splats[0].position, Vector3::new(0.1, 0.0, 0.0));
        assert_eq!(out.splats[0].rotation, scene.splats[0].rotation);
        assert_eq!(out.splats[0].sh_coeffs, scene.splats[0].sh_coeffs);
    }

    #[test]
    fn transform_is_group_action() {
        let mut scene = GaussianScene::new(
            vec![GaussianSplat::zeroed(1, 0), GaussianSplat::zeroed(1, 0)],
            1,
            0,
        );
        scene.splats[0].position = Vector3::new(1.0, 2.0, 3.0);
        scene.splats[0].sh_coeffs[1] = [0.2, 0.1, -0.4];
        scene.splats[1].position = Vector3::new(-0.5, 0.0, 0.25);
        scene.splats[1].rotation = [0.8, 0.0, 0.6, 0.0];

        let a = RigidTransform::from_axis_angle(&Vector3::new(0.2, 1.0, -0.3), 0.8);
        let mut b = RigidTransform::from_axis_angle(&Vector3::new(1.0, 0.1, 0.1), -1.3);
        b.translation = Vector3::new(0.05, -0.2, 0.4);

        let seq = transform_scene(&transform_scene(&scene, &a, ShRotation::default()), &b, ShRotation::default());
        let fused = transform_scene(&scene, &b.compose(&a), ShRotation::default());
        for (s, f) in seq.splats.iter().zip(&fused.splats) {
            assert_abs_diff_eq!(s.position, f.position, epsilon = 1e-9);
            // Quaternions are sign-ambiguous as rotations; align before comparing.
            let dot: f64 = (0..4).map(|k| s.rotation[k] * f.rotation[k]).sum();
            let sign = if dot < 0.0 { -1.0 } else { 1.0 };
            for k in 0..4 {
                assert!((s.rotation[k] - sign * f.rotation[k]).abs() < 1e-9);
            }
            for (c1, c2) in s.sh_coeffs.iter().zip(&f.sh_coeffs) {
                for ch in 0..3 {
                    assert_abs_diff_eq!(c1[ch], c2[ch], epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn truncate_mode_drops_high_degrees() {
        let scene = GaussianScene::new(vec![GaussianSplat::zeroed(2, 0)], 2, 0);
        let out = transform_scene(
            &scene,
            &RigidTransform::identity(),
            ShRotation::TruncateAboveDegree1,
        );
        assert_eq!(out.sh_degree, 1);
        assert_eq!(out.splats[0].sh_coeffs.len(), 4);
    }

    #[test]
    fn sigmoid_is_bounded() {
        assert_eq!(sigmoid(0.0), 0.5);
        // Strictly inside (0,1) while the exponential is resolvable in f64;
        // far in the tails it saturates to the closed endpoints, never beyond.
        assert!(sigmoid(30.0) < 1.0);
        assert!(sigmoid(-30.0) > 0.0);
        assert!(sigmoid(800.0) <= 1.0);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(-800.0).is_finite() && sigmoid(800.0).is_finite());
    }
}
