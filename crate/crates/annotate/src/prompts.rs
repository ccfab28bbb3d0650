//! Prompt templates shipped as versioned text resources. The template id is
//! part of the wire contract: mock fixtures key on it and golden tests pin
//! the rendered output, so changes require a new version suffix.

use nalgebra::Vector3;

pub const ARTICULATION_TEMPLATE_ID: &str = "articulation_v1";
pub const JOINT_PARAMETERS_TEMPLATE_ID: &str = "joint_parameters_v1";
pub const PHYSICS_TEMPLATE_ID: &str = "physics_v1";

const ARTICULATION: &str = include_str!("../resources/articulation_v1.txt");
const JOINT_PARAMETERS: &str = include_str!("../resources/joint_parameters_v1.txt");
const PHYSICS: &str = include_str!("../resources/physics_v1.txt");

/// (min, max) corners of an axis-aligned box.
pub type Bounds = (Vector3<f64>, Vector3<f64>);

fn fmt_point(v: &Vector3<f64>) -> String {
    format!("[{:.4}, {:.4}, {:.4}]", v.x, v.y, v.z)
}

pub fn articulation_prompt() -> String {
    ARTICULATION.to_string()
}

pub fn joint_parameters_prompt(
    category: &str,
    joint_type: &str,
    mobile_label: &str,
    base_label: &str,
    mobile_bounds: &Bounds,
    base_bounds: &Bounds,
) -> String {
    JOINT_PARAMETERS
        .replace("{category}", category)
        .replace("{joint_type}", joint_type)
        .replace("{mobile_label}", mobile_label)
        .replace("{base_label}", base_label)
        .replace("{mobile_min}", &fmt_point(&mobile_bounds.0))
        .replace("{mobile_max}", &fmt_point(&mobile_bounds.1))
        .replace("{base_min}", &fmt_point(&base_bounds.0))
        .replace("{base_max}", &fmt_point(&base_bounds.1))
}

pub fn physics_prompt(category: &str) -> String {
    PHYSICS.replace("{category}", category)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLACEHOLDERS: [&str; 8] = [
        "{category}",
        "{joint_type}",
        "{mobile_label}",
        "{base_label}",
        "{mobile_min}",
        "{mobile_max}",
        "{base_min}",
        "{base_max}",
    ];

    #[test]
    fn placeholders_are_fully_substituted() {
        let bounds = (Vector3::new(0.0, 0.0, 0.0), Vector3::new(0.1, 0.2, 0.3));
        let p = joint_parameters_prompt("cabinet", "prismatic", "drawer", "body", &bounds, &bounds);
        for ph in PLACEHOLDERS {
            assert!(!p.contains(ph), "unsubstituted {ph}");
        }
        assert!(p.contains("cabinet"));
        assert!(p.contains("[0.1000, 0.2000, 0.3000]"));
        let q = physics_prompt("mug");
        assert!(q.contains("mug"));
        assert!(!q.contains("{category}"));
    }
}
