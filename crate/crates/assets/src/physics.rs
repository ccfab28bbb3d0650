use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::AssetError;

/// Bulk material parameters. Only density feeds mass properties here; the
/// elastic moduli are carried through to downstream soft-body consumers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsProperties {
    /// kg/m³
    pub density: f64,
    /// Pa
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl PhysicsProperties {
    pub fn validate(&self) -> Result<(), AssetError> {
        range_check("density", self.density, 0.0, f64::INFINITY)?;
        range_check("youngs_modulus", self.youngs_modulus, 0.0, f64::INFINITY)?;
        range_check("poisson_ratio", self.poisson_ratio, -1.0, 0.5)?;
        Ok(())
    }
}

fn range_check(field: &'static str, value: f64, min: f64, max: f64) -> Result<(), AssetError> {
    if !value.is_finite() || value <= min || value >= max {
        return Err(AssetError::PhysicsRange {
            field,
            value,
            min,
            max,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointType {
    Revolute,
    Prismatic,
}

impl JointType {
    pub fn as_str(&self) -> &'static str {
        match self {
            JointType::Revolute => "revolute",
            JointType::Prismatic => "prismatic",
        }
    }
}

impl std::str::FromStr for JointType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "revolute" => Ok(JointType::Revolute),
            "prismatic" => Ok(JointType::Prismatic),
            other => Err(format!("unknown joint type {other:?}")),
        }
    }
}

/// A single joint between two labeled parts, in the object's canonical mesh
/// frame. Limits are meters for prismatic joints and radians for revolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticulationSpec {
    pub joint_type: JointType,
    pub axis: Vector3<f64>,
    pub origin: Vector3<f64>,
    pub limit_lower: f64,
    pub limit_upper: f64,
    pub mobile_label: String,
    pub base_label: String,
}

impl ArticulationSpec {
    pub fn validate(&self) -> Result<(), AssetError> {
        let invalid = |reason: String| AssetError::InvalidArticulation { reason };
        if !self.axis.iter().all(|c| c.is_finite()) || !self.origin.iter().all(|c| c.is_finite()) {
            return Err(invalid("non-finite axis or origin".into()));
        }
        if (self.axis.norm() - 1.0).abs() > 1e-6 {
            return Err(invalid(format!("axis norm {} is not 1", self.axis.norm())));
        }
        if !self.limit_lower.is_finite() || !self.limit_upper.is_finite() {
            return Err(invalid("non-finite limits".into()));
        }
        if self.limit_lower > self.limit_upper {
            return Err(invalid(format!(
                "limit order: lower {} > upper {}",
                self.limit_lower, self.limit_upper
            )));
        }
        if self.mobile_label == self.base_label {
            return Err(invalid(format!(
                "mobile and base are both {:?}",
                self.mobile_label
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ArticulationSpec {
        ArticulationSpec {
            joint_type: JointType::Prismatic,
            axis: Vector3::z(),
            origin: Vector3::zeros(),
            limit_lower: 0.0,
            limit_upper: 0.4,
            mobile_label: "drawer".into(),
            base_label: "cabinet".into(),
        }
    }

    #[test]
    fn physics_validation_bounds() {
        let ok = PhysicsProperties {
            density: 700.0,
            youngs_modulus: 1e9,
            poisson_ratio: 0.35,
        };
        ok.validate().unwrap();

        let bad_nu = PhysicsProperties {
            poisson_ratio: 0.7,
            ..ok
        };
        match bad_nu.validate() {
            Err(AssetError::PhysicsRange { field, min, max, .. }) => {
                assert_eq!(field, "poisson_ratio");
                assert_eq!((min, max), (-1.0, 0.5));
            }
            other => panic!("expected range error, got {other:?}"),
        }

        let bad_rho = PhysicsProperties {
            density: -5.0,
            ..ok
        };
        assert!(matches!(
            bad_rho.validate(),
            Err(AssetError::PhysicsRange {
                field: "density",
                ..
            })
        ));
    }

    #[test]
    fn articulation_validation() {
        spec().validate().unwrap();

        let mut bad = spec();
        bad.axis = Vector3::new(0.0, 0.0, 2.0);
        assert!(bad.validate().is_err());

        let mut bad = spec();
        bad.limit_lower = 0.4;
        bad.limit_upper = 0.0;
        match bad.validate() {
            Err(AssetError::InvalidArticulation { reason }) => {
                assert!(reason.contains("limit order"));
            }
            other => panic!("expected limit order error, got {other:?}"),
        }
    }

    #[test]
    fn joint_type_parses_and_prints() {
        assert_eq!("revolute".parse::<JointType>().unwrap(), JointType::Revolute);
        assert_eq!(JointType::Prismatic.as_str(), "prismatic");
        assert!("ball".parse::<JointType>().is_err());
    }
}
