use nalgebra::{Matrix3, Vector3};
use r2sim_scene::RigidTransform;

use crate::error::KinematicsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JointKind {
    Revolute,
    Prismatic,
    Fixed,
}

impl JointKind {
    pub fn is_movable(&self) -> bool {
        !matches!(self, JointKind::Fixed)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            JointKind::Revolute => "revolute",
            JointKind::Prismatic => "prismatic",
            JointKind::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inertial {
    pub mass: f64,
    /// Center of mass in the link frame.
    pub origin: Vector3<f64>,
    /// About the center of mass, axes parallel to the link frame.
    pub inertia: Matrix3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub inertial: Option<Inertial>,
    /// Relative mesh path from the collision block, when present.
    pub collision_mesh: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub kind: JointKind,
    pub parent: String,
    pub child: String,
    /// Parent link frame to joint (= child link) frame at zero displacement.
    pub origin: RigidTransform,
    /// Unit vector in the joint frame.
    pub axis: Vector3<f64>,
    /// [lo, hi]; required for movable joints, absent on fixed ones.
    pub limits: Option<[f64; 2]>,
}

/// A kinematic tree. Joints appear in document order; the movable subset in
/// that same order defines the layout of `JointConfig`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
    pub root: String,
}

impl RobotModel {
    pub fn link(&self, name: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    pub fn movable_joints(&self) -> impl Iterator<Item = &Joint> {
        self.joints.iter().filter(|j| j.kind.is_movable())
    }

    pub fn dof(&self) -> usize {
        self.movable_joints().count()
    }

    /// Tree structure, axis norms, and limit ordering.
    pub fn validate(&self) -> Result<(), KinematicsError> {
        for j in &self.joints {
            for link in [&j.parent, &j.child] {
                if self.link(link).is_none() {
                    return Err(KinematicsError::UnknownLink { link: link.clone() });
                }
            }
            if (j.axis.norm() - 1.0).abs() > 1e-6 {
                return Err(KinematicsError::Structure(format!(
                    "joint {:?} axis norm {} is not 1",
                    j.name,
                    j.axis.norm()
                )));
            }
            match (j.kind.is_movable(), j.limits) {
                (true, None) => {
                    return Err(KinematicsError::MissingLimits {
                        joint: j.name.clone(),
                    })
                }
                (true, Some([lo, hi])) if lo > hi => {
                    return Err(KinematicsError::Structure(format!(
                        "joint {:?} limits [{lo}, {hi}] are out of order",
                        j.name
                    )))
                }
                _ => {}
            }
        }

        // Every link except the root has exactly one parent joint, and all
        // links hang off the root. A cycle shows up as either a doubly
        // parented link or a component unreachable from the root.
        let mut parent_count = vec![0usize; self.links.len()];
        for j in &self.joints {
            let idx = self.links.iter().position(|l| l.name == j.child).unwrap();
            parent_count[idx] += 1;
            if parent_count[idx] > 1 {
                return Err(KinematicsError::NotATree {
                    reason: format!("link {:?} has more than one parent joint", j.child),
                });
            }
        }
        let roots: Vec<&str> = self
            .links
            .iter()
            .zip(&parent_count)
            .filter(|(_, &c)| c == 0)
            .map(|(l, _)| l.name.as_str())
            .collect();
        match roots.as_slice() {
            [] => {
                return Err(KinematicsError::NotATree {
                    reason: "no root link; the joint graph contains a cycle".into(),
                })
            }
            [one] if *one == self.root => {}
            [one] => {
                return Err(KinematicsError::NotATree {
                    reason: format!("root is {one:?}, model claims {:?}", self.root),
                })
            }
            many => {
                return Err(KinematicsError::NotATree {
                    reason: format!("multiple parentless links: {many:?}"),
                })
            }
        }
        let mut reached = 1usize;
        let mut frontier = vec![self.root.as_str()];
        while let Some(link) = frontier.pop() {
            for j in self.joints.iter().filter(|j| j.parent == link) {
                reached += 1;
                frontier.push(&j.child);
            }
        }
        if reached != self.links.len() {
            return Err(KinematicsError::NotATree {
                reason: format!(
                    "{} of {} links unreachable from the root; the joint graph contains a cycle",
                    self.links.len() - reached,
                    self.links.len()
                ),
            });
        }
        Ok(())
    }

    /// Clamps each value into its joint's limits.
    pub fn clamp_config(&self, q: &JointConfig) -> JointConfig {
        let values = self
            .movable_joints()
            .zip(&q.values)
            .map(|(j, &v)| {
                let [lo, hi] = j.limits.expect("movable joints carry limits");
                v.clamp(lo, hi)
            })
            .collect();
        JointConfig { values }
    }
}

/// One value per movable joint, radians or meters, in the robot's movable
/// joint order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig {
    pub values: Vec<f64>,
}

impl JointConfig {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(dof: usize) -> Self {
        Self {
            values: vec![0.0; dof],
        }
    }

    /// Length check always; limit check only when `strict`.
    pub fn validate(&self, robot: &RobotModel, strict: bool) -> Result<(), KinematicsError> {
        if self.values.len() != robot.dof() {
            return Err(KinematicsError::ConfigSize {
                got: self.values.len(),
                want: robot.dof(),
            });
        }
        if strict {
            for (j, &v) in robot.movable_joints().zip(&self.values) {
                let [lo, hi] = j.limits.expect("movable joints carry limits");
                if v < lo || v > hi {
                    return Err(KinematicsError::LimitViolation {
                        joint: j.name.clone(),
                        value: v,
                        lo,
                        hi,
                    });
                }
            }
        }
        Ok(())
    }
}
