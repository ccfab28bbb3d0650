use std::collections::BTreeMap;

use r2sim_scene::RigidTransform;

use crate::error::KinematicsError;
use crate::model::{JointConfig, JointKind, RobotModel};

/// World pose of every link: root at identity, each child at
/// parent ∘ origin ∘ motion(qᵢ).
pub fn forward_kinematics(
    robot: &RobotModel,
    q: &JointConfig,
) -> Result<BTreeMap<String, RigidTransform>, KinematicsError> {
    q.validate(robot, false)?;

    // Movable-joint order assigns q indices.
    let q_index: BTreeMap<&str, usize> = robot
        .movable_joints()
        .enumerate()
        .map(|(i, j)| (j.name.as_str(), i))
        .collect();

    let mut poses: BTreeMap<String, RigidTransform> = BTreeMap::new();
    poses.insert(robot.root.clone(), RigidTransform::identity());

    let mut frontier = vec![robot.root.clone()];
    while let Some(link) = frontier.pop() {
        let parent_pose = poses[&link].clone();
        for joint in robot.joints.iter().filter(|j| j.parent == link) {
            let motion = match joint.kind {
                JointKind::Fixed => RigidTransform::identity(),
                JointKind::Revolute => {
                    let angle = q.values[q_index[joint.name.as_str()]];
                    RigidTransform::from_axis_angle(&joint.axis, angle)
                }
                JointKind::Prismatic => {
                    let d = q.values[q_index[joint.name.as_str()]];
                    RigidTransform::from_translation(joint.axis * d)
                }
            };
            let pose = parent_pose.compose(&joint.origin).compose(&motion);
            poses.insert(joint.child.clone(), pose);
            frontier.push(joint.child.clone());
        }
    }
    Ok(poses)
}

/// Pose of one link, erroring when the link does not exist.
pub fn link_pose(
    robot: &RobotModel,
    q: &JointConfig,
    link: &str,
) -> Result<RigidTransform, KinematicsError> {
    if robot.link(link).is_none() {
        return Err(KinematicsError::UnknownLink {
            link: link.to_string(),
        });
    }
    let poses = forward_kinematics(robot, q)?;
    Ok(poses[link].clone())
}
