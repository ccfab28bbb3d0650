use nalgebra::{Matrix3, Matrix4, Vector3, Vector6};

use crate::{SceneError, SO3_TOL};

/// A rigid motion in SE(3): rotation matrix plus translation, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    /// Rotation about `axis` by `angle` radians, zero translation.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let rotation = nalgebra::Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(*axis),
            angle,
        )
        .into_inner();
        Self {
            rotation,
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rot_t = self.rotation.transpose();
        RigidTransform {
            rotation: rot_t,
            translation: -(rot_t * self.translation),
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Rotate a direction (no translation).
    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Checks RᵀR = I and det R = 1 within [`SO3_TOL`] (Frobenius).
    pub fn validate(&self) -> Result<(), SceneError> {
        let gram = self.rotation.transpose() * self.rotation - Matrix3::identity();
        let frob = gram.norm();
        if frob > SO3_TOL {
            return Err(SceneError::NotARotation(format!(
                "RᵀR deviates from I by {frob:.3e}"
            )));
        }
        let det = self.rotation.determinant();
        if (det - 1.0).abs() > SO3_TOL {
            return Err(SceneError::NotARotation(format!("det R = {det:.12}")));
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return Err(SceneError::NotARotation("non-finite translation".into()));
        }
        Ok(())
    }

    /// SE(3) exponential. `xi` is `[ρ; ω]`: translational part first, then
    /// the rotation vector. The rotation is `Exp(ω̂)` and the translation is
    /// `V(ω)·ρ` with the usual left Jacobian `V`.
    pub fn exp(xi: &Vector6<f64>) -> RigidTransform {
        let rho = Vector3::new(xi[0], xi[1], xi[2]);
        let omega = Vector3::new(xi[3], xi[4], xi[5]);
        let theta = omega.norm();
        let k = skew(&omega);
        let (rotation, v) = if theta < 1e-12 {
            (
                Matrix3::identity() + k,
                Matrix3::identity() + 0.5 * k,
            )
        } else {
            let t2 = theta * theta;
            let a = theta.sin() / theta;
            let b = (1.0 - theta.cos()) / t2;
            let c = (1.0 - a) / t2;
            (
                Matrix3::identity() + a * k + b * (k * k),
                Matrix3::identity() + b * k + c * (k * k),
            )
        };
        RigidTransform {
            rotation,
            translation: v * rho,
        }
    }

    /// Inverse of [`RigidTransform::exp`].
    pub fn log(&self) -> Vector6<f64> {
        let omega = rotation_log(&self.rotation);
        let theta = omega.norm();
        let k = skew(&omega);
        let v_inv = if theta < 1e-12 {
            Matrix3::identity() - 0.5 * k
        } else {
            let t2 = theta * theta;
            let b = (1.0 - theta.cos()) / t2;
            let a = theta.sin() / theta;
            let coeff = (1.0 - a / (2.0 * b)) / t2;
            Matrix3::identity() - 0.5 * k + coeff * (k * k)
        };
        let rho = v_inv * self.translation;
        Vector6::new(rho[0], rho[1], rho[2], omega[0], omega[1], omega[2])
    }

    /// Row-major 4×4 homogeneous matrix.
    pub fn to_matrix4(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn from_matrix4(m: &Matrix4<f64>) -> Self {
        Self {
            rotation: m.fixed_view::<3, 3>(0, 0).into_owned(),
            translation: m.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }
}

pub(crate) fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

/// Rotation-vector (axis·angle) log of an SO(3) matrix.
pub fn rotation_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let trace = r.trace();
    let cos_theta = ((trace - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    if theta < 1e-12 {
        // First-order: R ≈ I + ω̂
        return 0.5 * Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    }
    if (std::f64::consts::PI - theta) < 1e-6 {
        // Near π the antisymmetric part degenerates; recover the axis from
        // the symmetric part: (R + Rᵀ)/2 − cosθ·I = (1−cosθ)·aaᵀ.
        let s = 0.5 * (r + r.transpose()) - Matrix3::identity() * cos_theta;
        let diag = Vector3::new(s[(0, 0)], s[(1, 1)], s[(2, 2)]) / (1.0 - cos_theta);
        let mut axis = Vector3::new(
            diag[0].max(0.0).sqrt(),
            diag[1].max(0.0).sqrt(),
            diag[2].max(0.0).sqrt(),
        );
        // Fix signs using the off-diagonal products.
        let k = if axis[0] >= axis[1] && axis[0] >= axis[2] {
            0
        } else if axis[1] >= axis[2] {
            1
        } else {
            2
        };
        if axis[k] > 0.0 {
            let sgn = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
            match k {
                0 => {
                    axis[1] *= sgn(s[(0, 1)]);
                    axis[2] *= sgn(s[(0, 2)]);
                }
                1 => {
                    axis[0] *= sgn(s[(0, 1)]);
                    axis[2] *= sgn(s[(1, 2)]);
                }
                _ => {
                    axis[0] *= sgn(s[(0, 2)]);
                    axis[1] *= sgn(s[(1, 2)]);
                }
            }
        }
        let axis = axis.normalize();
        // Disambiguate the residual sign with the antisymmetric part.
        let anti = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
        let axis = if anti.dot(&axis) < 0.0 { -axis } else { axis };
        return axis * theta;
    }
    let scale = theta / (2.0 * theta.sin());
    scale
        * Vector3::new(
            r[(2, 1)] - r[(1, 2)],
            r[(0, 2)] - r[(2, 0)],
            r[(1, 0)] - r[(0, 1)],
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn random_transform(seed: u64) -> RigidTransform {
        // Cheap deterministic pseudo-randoms; good enough for group-law tests.
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let axis = Vector3::new(next(), next(), next());
        let angle = next() * std::f64::consts::PI;
        let t = Vector3::new(next(), next(), next());
        let mut tr = RigidTransform::from_axis_angle(&axis, angle);
        tr.translation = t;
        tr
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        for seed in 1..20u64 {
            let a = random_transform(seed);
            let id = a.compose(&a.inverse());
            assert!((id.rotation - Matrix3::identity()).norm() < 1e-10);
            assert!(id.translation.norm() < 1e-10);
        }
    }

    #[test]
    fn identity_applies_as_noop() {
        let p = Vector3::new(0.3, -1.2, 4.5);
        assert_eq!(RigidTransform::identity().apply(&p), p);
    }

    #[test]
    fn apply_compose_matches_sequential_application() {
        for seed in 1..20u64 {
            let a = random_transform(seed);
            let b = random_transform(seed + 100);
            let p = Vector3::new(0.1 * seed as f64, -0.2, 0.7);
            let lhs = a.compose(&b).apply(&p);
            let rhs = a.apply(&b.apply(&p));
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn exp_log_round_trip() {
        for seed in 1..30u64 {
            let t = random_transform(seed);
            let xi = t.log();
            let back = RigidTransform::exp(&xi);
            assert!((back.rotation - t.rotation).norm() < 1e-9, "seed {seed}");
            assert!((back.translation - t.translation).norm() < 1e-9);
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let t = RigidTransform::exp(&Vector6::zeros());
        assert_eq!(t.rotation, Matrix3::identity());
        assert_eq!(t.translation, Vector3::zeros());
    }

    #[test]
    fn validate_rejects_reflection() {
        let mut t = RigidTransform::identity();
        t.rotation[(0, 0)] = -1.0;
        assert!(t.validate().is_err());
    }

    #[test]
    fn rotation_log_near_pi() {
        let axis = Vector3::new(1.0, 2.0, -0.5).normalize();
        let angle = std::f64::consts::PI - 1e-8;
        let r = RigidTransform::from_axis_angle(&axis, angle);
        let w = rotation_log(&r.rotation);
        assert_abs_diff_eq!(w.norm(), angle, epsilon = 1e-6);
        assert_abs_diff_eq!(w.normalize().dot(&axis).abs(), 1.0, epsilon = 1e-6);
    }
}
