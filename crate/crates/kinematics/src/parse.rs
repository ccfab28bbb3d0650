use nalgebra::{Matrix3, Rotation3, Vector3};
use r2sim_scene::RigidTransform;
use roxmltree::{Document, Node};

use crate::error::KinematicsError;
use crate::model::{Inertial, Joint, JointKind, Link, RobotModel};

fn structure(msg: impl Into<String>) -> KinematicsError {
    KinematicsError::Structure(msg.into())
}

fn attr<'a>(node: &'a Node, name: &str, context: &str) -> Result<&'a str, KinematicsError> {
    node.attribute(name)
        .ok_or_else(|| structure(format!("{context} is missing attribute {name:?}")))
}

fn parse_f64(raw: &str, context: &str) -> Result<f64, KinematicsError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| structure(format!("{context}: bad number {raw:?}")))?;
    if !v.is_finite() {
        return Err(structure(format!("{context}: non-finite number {raw:?}")));
    }
    Ok(v)
}

fn parse_vec3(raw: &str, context: &str) -> Result<Vector3<f64>, KinematicsError> {
    let parts: Vec<&str> = raw.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(structure(format!(
            "{context}: expected 3 numbers, got {raw:?}"
        )));
    }
    Ok(Vector3::new(
        parse_f64(parts[0], context)?,
        parse_f64(parts[1], context)?,
        parse_f64(parts[2], context)?,
    ))
}

fn child<'a, 'i>(node: Node<'a, 'i>, tag: &str) -> Option<Node<'a, 'i>> {
    node.children()
        .find(|n| n.is_element() && n.tag_name().name() == tag)
}

/// `<origin xyz rpy>` with URDF fixed-axis convention Rz(yaw)·Ry(pitch)·Rx(roll);
/// both attributes default to zero.
fn parse_origin(node: Option<Node>, context: &str) -> Result<RigidTransform, KinematicsError> {
    let Some(node) = node else {
        return Ok(RigidTransform::identity());
    };
    let xyz = match node.attribute("xyz") {
        Some(raw) => parse_vec3(raw, context)?,
        None => Vector3::zeros(),
    };
    let rotation = match node.attribute("rpy") {
        Some(raw) => {
            let rpy = parse_vec3(raw, context)?;
            *Rotation3::from_euler_angles(rpy.x, rpy.y, rpy.z).matrix()
        }
        None => Matrix3::identity(),
    };
    Ok(RigidTransform::new(rotation, xyz))
}

fn parse_inertial(node: Node, link: &str) -> Result<Inertial, KinematicsError> {
    let ctx = format!("link {link:?} inertial");
    let origin = parse_origin(child(node, "origin"), &ctx)?;
    let mass_node = child(node, "mass").ok_or_else(|| structure(format!("{ctx}: no mass")))?;
    let mass = parse_f64(attr(&mass_node, "value", &ctx)?, &ctx)?;
    let inertia_node =
        child(node, "inertia").ok_or_else(|| structure(format!("{ctx}: no inertia")))?;
    let get = |name: &str| -> Result<f64, KinematicsError> {
        parse_f64(attr(&inertia_node, name, &ctx)?, &ctx)
    };
    let (ixx, ixy, ixz) = (get("ixx")?, get("ixy")?, get("ixz")?);
    let (iyy, iyz, izz) = (get("iyy")?, get("iyz")?, get("izz")?);
    Ok(Inertial {
        mass,
        origin: origin.translation,
        inertia: Matrix3::new(ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz),
    })
}

fn parse_link(node: Node) -> Result<Link, KinematicsError> {
    let name = attr(&node, "name", "link")?.to_string();
    let inertial = match child(node, "inertial") {
        Some(n) => Some(parse_inertial(n, &name)?),
        None => None,
    };
    let collision_mesh = child(node, "collision")
        .and_then(|c| child(c, "geometry"))
        .and_then(|g| child(g, "mesh"))
        .and_then(|m| m.attribute("filename"))
        .map(str::to_string);
    Ok(Link {
        name,
        inertial,
        collision_mesh,
    })
}

fn parse_joint(node: Node) -> Result<Joint, KinematicsError> {
    let name = attr(&node, "name", "joint")?.to_string();
    let ctx = format!("joint {name:?}");
    let kind = match attr(&node, "type", &ctx)? {
        "revolute" => JointKind::Revolute,
        "prismatic" => JointKind::Prismatic,
        "fixed" => JointKind::Fixed,
        other => {
            return Err(KinematicsError::UnknownJointType {
                joint: name,
                kind: other.to_string(),
            })
        }
    };
    let origin = parse_origin(child(node, "origin"), &ctx)?;
    let parent = attr(
        &child(node, "parent").ok_or_else(|| structure(format!("{ctx}: no parent")))?,
        "link",
        &ctx,
    )?
    .to_string();
    let child_link = attr(
        &child(node, "child").ok_or_else(|| structure(format!("{ctx}: no child")))?,
        "link",
        &ctx,
    )?
    .to_string();

    // URDF default axis.
    let mut axis = Vector3::x();
    if let Some(axis_node) = child(node, "axis") {
        axis = parse_vec3(attr(&axis_node, "xyz", &ctx)?, &ctx)?;
        let norm = axis.norm();
        if norm < 1e-9 {
            return Err(structure(format!("{ctx}: zero-norm axis")));
        }
        if (norm - 1.0).abs() > 1e-6 {
            log::warn!("{ctx}: axis norm {norm} renormalized");
        }
        axis /= norm;
    }

    let limits = match child(node, "limit") {
        Some(limit) => {
            let lo = parse_f64(attr(&limit, "lower", &ctx)?, &ctx)?;
            let hi = parse_f64(attr(&limit, "upper", &ctx)?, &ctx)?;
            Some([lo, hi])
        }
        None => None,
    };
    if kind.is_movable() && limits.is_none() {
        return Err(KinematicsError::MissingLimits { joint: name });
    }

    Ok(Joint {
        name,
        kind,
        parent,
        child: child_link,
        origin,
        axis,
        limits: if kind.is_movable() { limits } else { None },
    })
}

/// Parses the URDF subset: links with optional inertial and collision mesh
/// references, joints of type revolute/prismatic/fixed. Unrecognized child
/// elements (materials, dynamics, ...) are ignored.
pub fn parse_urdf(text: &str) -> Result<RobotModel, KinematicsError> {
    let doc = Document::parse(text)?;
    let robot = doc.root_element();
    if robot.tag_name().name() != "robot" {
        return Err(structure(format!(
            "root element is <{}>, expected <robot>",
            robot.tag_name().name()
        )));
    }
    let name = robot.attribute("name").unwrap_or("robot").to_string();

    let mut links = Vec::new();
    let mut joints = Vec::new();
    for node in robot.children().filter(|n| n.is_element()) {
        match node.tag_name().name() {
            "link" => links.push(parse_link(node)?),
            "joint" => joints.push(parse_joint(node)?),
            _ => {}
        }
    }
    if links.is_empty() {
        return Err(structure("no links"));
    }

    let root = links
        .iter()
        .map(|l| l.name.as_str())
        .find(|name| joints.iter().all(|j| j.child != *name))
        .unwrap_or(&links[0].name)
        .to_string();

    let model = RobotModel {
        name,
        links,
        joints,
        root,
    };
    model.validate()?;
    Ok(model)
}
