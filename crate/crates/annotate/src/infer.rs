//! Inference operations: each renders a prompt, runs one exchange through
//! the client, and validates the reply into a domain type. Out-of-range
//! numerics are rejected rather than clamped; only axis direction is
//! normalized silently.

use nalgebra::Vector3;
use r2sim_assets::{ArticulationSpec, JointType, PhysicsProperties};
use r2sim_render::{encode_png_rgb, RgbImage64};
use serde::Deserialize;
use serde_json::Value;

use crate::client::{AnnotationClient, ChatRequest};
use crate::error::AnnotateError;
use crate::prompts::{
    articulation_prompt, joint_parameters_prompt, physics_prompt, Bounds,
    ARTICULATION_TEMPLATE_ID, JOINT_PARAMETERS_TEMPLATE_ID, PHYSICS_TEMPLATE_ID,
};

/// First-stage annotation: category plus proposed articulation. `joint_type`
/// of `None` means a rigid object, in which case no part labels exist.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticulationProposal {
    pub category: String,
    pub joint_type: Option<JointType>,
    /// (mobile part, base part); present exactly when `joint_type` is.
    pub part_labels: Option<(String, String)>,
}

impl ArticulationProposal {
    pub fn validate(&self) -> Result<(), AnnotateError> {
        if self.category.trim().is_empty() {
            return Err(AnnotateError::InvalidProposal {
                reason: "category is empty".into(),
            });
        }
        match (&self.joint_type, &self.part_labels) {
            (None, None) => Ok(()),
            (None, Some(_)) => Err(AnnotateError::InvalidProposal {
                reason: "part labels given for a rigid object".into(),
            }),
            (Some(jt), None) => Err(AnnotateError::InvalidProposal {
                reason: format!("joint_type {} requires two part labels", jt.as_str()),
            }),
            (Some(_), Some((mobile, base))) => {
                if mobile.trim().is_empty() || base.trim().is_empty() {
                    return Err(AnnotateError::InvalidProposal {
                        reason: "part labels must be non-empty".into(),
                    });
                }
                if mobile == base {
                    return Err(AnnotateError::InvalidProposal {
                        reason: format!("mobile and base labels are both {mobile:?}"),
                    });
                }
                Ok(())
            }
        }
    }
}

fn encode_views(views: &[RgbImage64; 4]) -> Result<Vec<Vec<u8>>, AnnotateError> {
    views
        .iter()
        .map(|v| encode_png_rgb(v).map_err(|e| AnnotateError::Image(e.to_string())))
        .collect()
}

/// Parses a reply that must be exactly one JSON object.
fn parse_object(reply: &str) -> Result<Value, AnnotateError> {
    let value: Value =
        serde_json::from_str(reply.trim()).map_err(|e| AnnotateError::ReplyNotJson {
            message: e.to_string(),
        })?;
    if !value.is_object() {
        return Err(AnnotateError::BadReply {
            reason: "reply is JSON but not a single object".into(),
        });
    }
    Ok(value)
}

fn from_object<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, AnnotateError> {
    serde_json::from_value(value).map_err(|e| AnnotateError::BadReply {
        reason: e.to_string(),
    })
}

#[derive(Deserialize)]
struct ArticulationReply {
    category: String,
    joint_type: String,
    #[serde(default)]
    parts: Vec<String>,
}

pub fn infer_articulation(
    views: &[RgbImage64; 4],
    client: &AnnotationClient,
) -> Result<ArticulationProposal, AnnotateError> {
    let request = ChatRequest {
        template_id: ARTICULATION_TEMPLATE_ID,
        prompt: articulation_prompt(),
        images: encode_views(views)?,
    };
    let reply: ArticulationReply = from_object(parse_object(&client.complete(&request)?)?)?;
    let (joint_type, part_labels) = match reply.joint_type.as_str() {
        "none" => {
            if !reply.parts.is_empty() {
                return Err(AnnotateError::InvalidProposal {
                    reason: format!(
                        "joint_type none must have empty parts, got {}",
                        reply.parts.len()
                    ),
                });
            }
            (None, None)
        }
        other => {
            let jt: JointType = other
                .parse()
                .map_err(|_| AnnotateError::UnknownJointType {
                    value: other.to_string(),
                })?;
            if reply.parts.len() != 2 {
                return Err(AnnotateError::InvalidProposal {
                    reason: format!(
                        "joint_type {} requires exactly two part labels, got {}",
                        jt.as_str(),
                        reply.parts.len()
                    ),
                });
            }
            (
                Some(jt),
                Some((reply.parts[0].clone(), reply.parts[1].clone())),
            )
        }
    };
    let proposal = ArticulationProposal {
        category: reply.category,
        joint_type,
        part_labels,
    };
    proposal.validate()?;
    Ok(proposal)
}

#[derive(Deserialize)]
struct JointParametersReply {
    axis: [f64; 3],
    origin: [f64; 3],
    limit_lower: f64,
    limit_upper: f64,
}

pub fn infer_joint_parameters(
    views: &[RgbImage64; 4],
    proposal: &ArticulationProposal,
    part_bounds: &(Bounds, Bounds),
    client: &AnnotationClient,
) -> Result<ArticulationSpec, AnnotateError> {
    proposal.validate()?;
    let joint_type = proposal
        .joint_type
        .ok_or_else(|| AnnotateError::InvalidProposal {
            reason: "joint_type none has no joint parameters".into(),
        })?;
    let (mobile_label, base_label) = proposal
        .part_labels
        .clone()
        .expect("validated proposal with a joint has labels");
    let request = ChatRequest {
        template_id: JOINT_PARAMETERS_TEMPLATE_ID,
        prompt: joint_parameters_prompt(
            &proposal.category,
            joint_type.as_str(),
            &mobile_label,
            &base_label,
            &part_bounds.0,
            &part_bounds.1,
        ),
        images: encode_views(views)?,
    };
    let reply: JointParametersReply = from_object(parse_object(&client.complete(&request)?)?)?;
    let axis = Vector3::from(reply.axis);
    let norm = axis.norm();
    if !norm.is_finite() || norm < 1e-9 {
        return Err(AnnotateError::ZeroAxis);
    }
    let spec = ArticulationSpec {
        joint_type,
        axis: axis / norm,
        origin: Vector3::from(reply.origin),
        limit_lower: reply.limit_lower,
        limit_upper: reply.limit_upper,
        mobile_label,
        base_label,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn estimate_physics(
    views: &[RgbImage64; 4],
    category: &str,
    client: &AnnotationClient,
) -> Result<PhysicsProperties, AnnotateError> {
    let request = ChatRequest {
        template_id: PHYSICS_TEMPLATE_ID,
        prompt: physics_prompt(category),
        images: encode_views(views)?,
    };
    let physics: PhysicsProperties = from_object(parse_object(&client.complete(&request)?)?)?;
    physics.validate()?;
    Ok(physics)
}
