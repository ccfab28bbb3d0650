use r2sim_scene::RigidTransform;

use crate::error::KinematicsError;
use crate::fk::forward_kinematics;
use crate::ik::{ik_solve, IkOptions};
use crate::model::{JointConfig, RobotModel};

#[derive(Debug, Clone)]
pub struct PlanOptions {
    pub ik: IkOptions,
    /// Largest per-joint change between consecutive steps, rad or m.
    pub max_joint_step: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            ik: IkOptions::default(),
            max_joint_step: 0.05,
        }
    }
}

/// Time-stamped joint-space path with cached end-effector poses.
#[derive(Debug, Clone)]
pub struct JointTrajectory {
    /// Strictly increasing, seconds.
    pub timestamps: Vec<f64>,
    pub configurations: Vec<JointConfig>,
    pub end_poses: Vec<RigidTransform>,
    /// Indices of the start config and of each waypoint's knot.
    pub knot_indices: Vec<usize>,
}

impl JointTrajectory {
    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }
}

/// Solves IK per waypoint (each seeded from the previous solution) and
/// linearly interpolates joint space between the solutions, one sample every
/// `step_time` seconds. A waypoint whose IK does not converge aborts with
/// that waypoint's index.
pub fn plan_linear(
    robot: &RobotModel,
    end_link: &str,
    q_start: &JointConfig,
    waypoints: &[RigidTransform],
    step_time: f64,
    opts: &PlanOptions,
) -> Result<JointTrajectory, KinematicsError> {
    if waypoints.is_empty() {
        return Err(KinematicsError::NoWaypoints);
    }
    if !(step_time > 0.0 && step_time.is_finite()) {
        return Err(KinematicsError::BadStepTime(step_time));
    }
    q_start.validate(robot, false)?;
    let q_start = robot.clamp_config(q_start);

    let mut knots = vec![q_start.clone()];
    for (index, target) in waypoints.iter().enumerate() {
        let seed = knots.last().unwrap();
        let result = ik_solve(robot, end_link, target, seed, &opts.ik)?;
        if !result.converged {
            return Err(KinematicsError::WaypointIk {
                index,
                pos_residual: result.pos_residual,
                rot_residual: result.rot_residual,
            });
        }
        knots.push(result.q);
    }

    let mut configurations = vec![q_start.clone()];
    let mut knot_indices = vec![0usize];
    for pair in knots.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let widest = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (y - x).abs())
            .fold(0.0f64, f64::max);
        let steps = ((widest / opts.max_joint_step).ceil() as usize).max(1);
        for s in 1..=steps {
            let t = s as f64 / steps as f64;
            let values = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| x + (y - x) * t)
                .collect();
            configurations.push(JointConfig::new(values));
        }
        knot_indices.push(configurations.len() - 1);
    }

    let timestamps = (0..configurations.len())
        .map(|i| i as f64 * step_time)
        .collect();
    let end_poses = configurations
        .iter()
        .map(|q| forward_kinematics(robot, q).map(|poses| poses[end_link].clone()))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(JointTrajectory {
        timestamps,
        configurations,
        end_poses,
        knot_indices,
    })
}
