use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::asset::InteractiveAsset;
use crate::error::AssetError;
use crate::mass::MassProperties;

/// Link names forbidden for parts; `world` is commonly used by simulators to
/// anchor robots.
pub const RESERVED_LINK_NAMES: &[&str] = &["world"];

/// Fixed 7-decimal formatting with trailing zeros trimmed, the precision
/// contract for every numeric attribute in emitted URDF.
pub fn fmt_urdf_float(value: f64) -> String {
    let mut s = format!("{value:.7}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn fmt_vec(v: &Vector3<f64>) -> String {
    format!(
        "{} {} {}",
        fmt_urdf_float(v.x),
        fmt_urdf_float(v.y),
        fmt_urdf_float(v.z)
    )
}

/// Part labels may be arbitrary strings; link names and mesh file names use
/// this flattened form.
pub fn link_name(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Relative path of a part's mesh inside an asset bundle.
pub fn mesh_path(label: &str) -> String {
    format!("meshes/{}.obj", link_name(label))
}

fn write_inertial(
    out: &mut String,
    link: &str,
    mass: &MassProperties,
    frame_offset: &Vector3<f64>,
) -> Result<(), AssetError> {
    let com = mass.center_of_mass - frame_offset;
    let i = &mass.inertia;
    let finite = mass.mass.is_finite()
        && com.iter().all(|c| c.is_finite())
        && i.iter().all(|c| c.is_finite());
    if !finite {
        return Err(AssetError::NonFiniteInertia {
            link: link.to_string(),
        });
    }
    let _ = writeln!(out, "    <inertial>");
    let _ = writeln!(
        out,
        "      <origin xyz=\"{}\" rpy=\"0 0 0\"/>",
        fmt_vec(&com)
    );
    let _ = writeln!(
        out,
        "      <mass value=\"{}\"/>",
        fmt_urdf_float(mass.mass)
    );
    let _ = writeln!(
        out,
        "      <inertia ixx=\"{}\" ixy=\"{}\" ixz=\"{}\" iyy=\"{}\" iyz=\"{}\" izz=\"{}\"/>",
        fmt_urdf_float(i[(0, 0)]),
        fmt_urdf_float(i[(0, 1)]),
        fmt_urdf_float(i[(0, 2)]),
        fmt_urdf_float(i[(1, 1)]),
        fmt_urdf_float(i[(1, 2)]),
        fmt_urdf_float(i[(2, 2)]),
    );
    let _ = writeln!(out, "    </inertial>");
    Ok(())
}

fn write_link(
    out: &mut String,
    label: &str,
    mass: &MassProperties,
    frame_offset: &Vector3<f64>,
) -> Result<(), AssetError> {
    let name = link_name(label);
    if RESERVED_LINK_NAMES.contains(&name.as_str()) {
        return Err(AssetError::ReservedName { name });
    }
    let geom_origin = -frame_offset;
    let _ = writeln!(out, "  <link name=\"{name}\">");
    write_inertial(out, &name, mass, frame_offset)?;
    for tag in ["visual", "collision"] {
        let _ = writeln!(out, "    <{tag}>");
        let _ = writeln!(
            out,
            "      <origin xyz=\"{}\" rpy=\"0 0 0\"/>",
            fmt_vec(&geom_origin)
        );
        let _ = writeln!(out, "      <geometry>");
        let _ = writeln!(
            out,
            "        <mesh filename=\"{}\"/>",
            xml_escape(&mesh_path(label))
        );
        let _ = writeln!(out, "      </geometry>");
        let _ = writeln!(out, "    </{tag}>");
    }
    let _ = writeln!(out, "  </link>");
    Ok(())
}

/// Serializes the asset to a URDF document.
///
/// The base part's link frame coincides with the object frame. An articulated
/// asset places the mobile link's frame at the joint origin (object frame
/// translated by `ArticulationSpec::origin`), so its geometry and inertial
/// origins carry the compensating offset.
pub fn build_urdf(asset: &InteractiveAsset, name: &str) -> Result<String, AssetError> {
    asset.validate()?;

    match &asset.articulation {
        Some(spec) => {
            if asset.parts.len() != 2 {
                return Err(AssetError::InvalidAsset {
                    reason: format!(
                        "articulated asset must have exactly the two referenced parts, found {}",
                        asset.parts.len()
                    ),
                });
            }
            let mut names: Vec<String> = asset.parts.keys().map(|l| link_name(l)).collect();
            names.dedup();
            if names.len() != 2 {
                return Err(AssetError::InvalidAsset {
                    reason: "part labels collapse to the same link name".into(),
                });
            }
            let mut out = String::new();
            let _ = writeln!(out, "<?xml version=\"1.0\"?>");
            let _ = writeln!(out, "<robot name=\"{}\">", xml_escape(name));
            for (label, mesh) in &asset.parts {
                let _ = mesh;
                let offset = if *label == spec.mobile_label {
                    spec.origin
                } else {
                    Vector3::zeros()
                };
                write_link(&mut out, label, &asset.mass[label], &offset)?;
            }
            let _ = writeln!(
                out,
                "  <joint name=\"{}_joint\" type=\"{}\">",
                link_name(name),
                spec.joint_type.as_str()
            );
            let _ = writeln!(
                out,
                "    <origin xyz=\"{}\" rpy=\"0 0 0\"/>",
                fmt_vec(&spec.origin)
            );
            let _ = writeln!(
                out,
                "    <parent link=\"{}\"/>",
                link_name(&spec.base_label)
            );
            let _ = writeln!(
                out,
                "    <child link=\"{}\"/>",
                link_name(&spec.mobile_label)
            );
            let _ = writeln!(out, "    <axis xyz=\"{}\"/>", fmt_vec(&spec.axis));
            let _ = writeln!(
                out,
                "    <limit lower=\"{}\" upper=\"{}\" effort=\"0\" velocity=\"0\"/>",
                fmt_urdf_float(spec.limit_lower),
                fmt_urdf_float(spec.limit_upper)
            );
            let _ = writeln!(out, "  </joint>");
            let _ = writeln!(out, "</robot>");
            Ok(out)
        }
        None => {
            if asset.parts.len() != 1 {
                return Err(AssetError::InvalidAsset {
                    reason: format!(
                        "unarticulated asset must have exactly one part, found {}",
                        asset.parts.len()
                    ),
                });
            }
            let mut out = String::new();
            let _ = writeln!(out, "<?xml version=\"1.0\"?>");
            let _ = writeln!(out, "<robot name=\"{}\">", xml_escape(name));
            let (label, _) = asset.parts.iter().next().unwrap();
            write_link(&mut out, label, &asset.mass[label], &Vector3::zeros())?;
            let _ = writeln!(out, "</robot>");
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{ArticulationSpec, JointType, PhysicsProperties};
    use crate::primitives::box_mesh;
    use std::collections::BTreeMap;

    fn physics() -> PhysicsProperties {
        PhysicsProperties {
            density: 700.0,
            youngs_modulus: 1e9,
            poisson_ratio: 0.3,
        }
    }

    fn drawer_asset() -> InteractiveAsset {
        let mut parts = BTreeMap::new();
        parts.insert(
            "drawer body".to_string(),
            box_mesh(Vector3::new(0.35, 0.4, 0.12)),
        );
        parts.insert(
            "main cabinet".to_string(),
            box_mesh(Vector3::new(0.4, 0.45, 0.6)),
        );
        let spec = ArticulationSpec {
            joint_type: JointType::Revolute,
            axis: Vector3::z(),
            origin: Vector3::new(0.2, 0.0, 0.1),
            limit_lower: 0.0,
            limit_upper: std::f64::consts::FRAC_PI_2,
            mobile_label: "drawer body".into(),
            base_label: "main cabinet".into(),
        };
        InteractiveAsset::assemble(parts, physics(), Some(spec)).unwrap()
    }

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_urdf_float(0.0), "0");
        assert_eq!(fmt_urdf_float(-0.0), "0");
        assert_eq!(fmt_urdf_float(std::f64::consts::FRAC_PI_2), "1.5707963");
        assert_eq!(fmt_urdf_float(0.5), "0.5");
        assert_eq!(fmt_urdf_float(-1.25), "-1.25");
        assert_eq!(fmt_urdf_float(166.0 + 2.0 / 3.0), "166.6666667");
    }

    #[test]
    fn revolute_limits_serialize_to_seven_decimals() {
        let urdf = build_urdf(&drawer_asset(), "drawer").unwrap();
        assert!(urdf.contains("lower=\"0\" upper=\"1.5707963\""), "{urdf}");
        assert!(urdf.contains("type=\"revolute\""));
        assert!(urdf.contains("<parent link=\"main_cabinet\"/>"));
        assert!(urdf.contains("<child link=\"drawer_body\"/>"));
    }

    #[test]
    fn unarticulated_asset_is_a_single_link() {
        let mut parts = BTreeMap::new();
        parts.insert("mug".to_string(), box_mesh(Vector3::new(0.1, 0.1, 0.1)));
        let asset = InteractiveAsset::assemble(parts, physics(), None).unwrap();
        let urdf = build_urdf(&asset, "mug").unwrap();
        assert_eq!(urdf.matches("<link ").count(), 1);
        assert_eq!(urdf.matches("<joint ").count(), 0);
    }

    #[test]
    fn reserved_link_name_is_rejected() {
        let mut parts = BTreeMap::new();
        parts.insert("world".to_string(), box_mesh(Vector3::new(0.1, 0.1, 0.1)));
        let asset = InteractiveAsset::assemble(parts, physics(), None).unwrap();
        assert!(matches!(
            build_urdf(&asset, "x"),
            Err(AssetError::ReservedName { .. })
        ));
    }

    #[test]
    fn non_finite_inertia_is_rejected() {
        let mut parts = BTreeMap::new();
        parts.insert("mug".to_string(), box_mesh(Vector3::new(0.1, 0.1, 0.1)));
        let mut asset = InteractiveAsset::assemble(parts, physics(), None).unwrap();
        asset.mass.get_mut("mug").unwrap().inertia[(0, 0)] = f64::NAN;
        assert!(matches!(
            build_urdf(&asset, "mug"),
            Err(AssetError::NonFiniteInertia { .. })
        ));
    }

    #[test]
    fn mobile_link_frame_compensates_joint_origin() {
        let asset = drawer_asset();
        let spec = asset.articulation.as_ref().unwrap();
        let urdf = build_urdf(&asset, "drawer").unwrap();
        // Joint anchored at the spec origin; mobile geometry shifted back.
        assert!(urdf.contains(&format!(
            "<origin xyz=\"{}\" rpy=\"0 0 0\"/>",
            fmt_vec(&spec.origin)
        )));
        assert!(urdf.contains(&format!(
            "<origin xyz=\"{}\" rpy=\"0 0 0\"/>",
            fmt_vec(&-spec.origin)
        )));
    }
}
