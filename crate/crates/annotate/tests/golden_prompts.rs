//! Golden-file pins on serialized request bodies. Image payload bytes are
//! redacted so the files stay stable across PNG encoder changes; everything
//! else (prompt text, message shape, model, temperature) is byte-compared.
//!
//! Regenerate with UPDATE_GOLDEN=1 after an intentional template change.

use std::path::PathBuf;

use nalgebra::Vector3;
use r2sim_annotate::{
    articulation_prompt, chat_body, joint_parameters_prompt, physics_prompt, ChatRequest,
    ARTICULATION_TEMPLATE_ID, JOINT_PARAMETERS_TEMPLATE_ID, PHYSICS_TEMPLATE_ID,
};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn check(name: &str, request: &ChatRequest) {
    let body = chat_body("vision-default", request, true);
    let rendered = serde_json::to_string_pretty(&body).unwrap() + "\n";
    let path = golden_dir().join(format!("{name}.json"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &rendered).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(
        rendered,
        expected,
        "request body for {name} drifted from golden file; \
         rerun with UPDATE_GOLDEN=1 if the change is intentional"
    );
}

fn fake_image() -> Vec<u8> {
    vec![0u8; 16]
}

#[test]
fn articulation_request_body_matches_golden() {
    check(
        "articulation_v1",
        &ChatRequest {
            template_id: ARTICULATION_TEMPLATE_ID,
            prompt: articulation_prompt(),
            images: vec![fake_image(); 4],
        },
    );
}

#[test]
fn joint_parameters_request_body_matches_golden() {
    let mobile = (Vector3::new(-0.15, -0.1, 0.0), Vector3::new(0.15, 0.1, 0.08));
    let base = (Vector3::new(-0.2, -0.15, -0.1), Vector3::new(0.2, 0.15, 0.12));
    check(
        "joint_parameters_v1",
        &ChatRequest {
            template_id: JOINT_PARAMETERS_TEMPLATE_ID,
            prompt: joint_parameters_prompt(
                "cabinet",
                "prismatic",
                "drawer body",
                "main cabinet",
                &mobile,
                &base,
            ),
            images: vec![fake_image(); 4],
        },
    );
}

#[test]
fn physics_request_body_matches_golden() {
    check(
        "physics_v1",
        &ChatRequest {
            template_id: PHYSICS_TEMPLATE_ID,
            prompt: physics_prompt("ceramic mug"),
            images: vec![fake_image(); 4],
        },
    );
}
