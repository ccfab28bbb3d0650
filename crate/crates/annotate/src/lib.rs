//! Vision-service annotation of forged assets: orthographic view rendering,
//! articulation and physics inference over a chat-completion endpoint, and a
//! fixture-driven mock backend so every pipeline stage runs offline.
//!
//! All replies are validated against the domain invariants before they leave
//! this crate; a model answer that violates them is an error the operator
//! sees, never a silently corrected value.

mod client;
mod error;
mod infer;
mod mock;
mod prompts;
mod views;

pub use client::{
    backoff_delay, chat_body, AnnotationClient, AnnotationClientConfig, ChatBackend, ChatRequest,
    HttpBackend,
};
pub use error::AnnotateError;
pub use infer::{estimate_physics, infer_articulation, infer_joint_parameters, ArticulationProposal};
pub use mock::{Fixture, MockBackend};
pub use prompts::{
    articulation_prompt, joint_parameters_prompt, physics_prompt, Bounds,
    ARTICULATION_TEMPLATE_ID, JOINT_PARAMETERS_TEMPLATE_ID, PHYSICS_TEMPLATE_ID,
};
pub use views::render_orthographic_views;
