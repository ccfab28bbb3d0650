use nalgebra::{DMatrix, DVector};
use r2sim_scene::{rotation_log, RigidTransform};

use crate::error::KinematicsError;
use crate::fk::forward_kinematics;
use crate::model::{JointConfig, RobotModel};

#[derive(Debug, Clone)]
pub struct IkOptions {
    pub max_iters: usize,
    /// Initial Levenberg damping λ; doubled on rejected steps, scaled by 0.7
    /// on accepted ones.
    pub damping: f64,
    /// meters
    pub pos_tol: f64,
    /// radians. An infinite value drops the orientation rows entirely so a
    /// low-DOF arm can solve position-only targets.
    pub rot_tol: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            damping: 0.05,
            pos_tol: 1e-5,
            rot_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IkResult {
    pub q: JointConfig,
    pub converged: bool,
    /// meters
    pub pos_residual: f64,
    /// radians; 0 when solving position-only
    pub rot_residual: f64,
    pub iterations: usize,
    /// Combined error norm at the start and after every accepted step.
    pub cost_trace: Vec<f64>,
}

const FD_STEP: f64 = 1e-6;

fn pose_error(
    robot: &RobotModel,
    end_link: &str,
    target: &RigidTransform,
    q: &JointConfig,
    position_only: bool,
) -> Result<DVector<f64>, KinematicsError> {
    let poses = forward_kinematics(robot, q)?;
    let current = &poses[end_link];
    let rows = if position_only { 3 } else { 6 };
    let mut e = DVector::zeros(rows);
    let dp = target.translation - current.translation;
    e[0] = dp.x;
    e[1] = dp.y;
    e[2] = dp.z;
    if !position_only {
        let w = rotation_log(&(target.rotation * current.rotation.transpose()));
        e[3] = w.x;
        e[4] = w.y;
        e[5] = w.z;
    }
    Ok(e)
}

/// Damped-least-squares IK on the stacked position/rotation error with a
/// central-difference Jacobian and joint-limit clamping after each step.
/// Unreachable targets come back with `converged = false`, not an error.
pub fn ik_solve(
    robot: &RobotModel,
    end_link: &str,
    target: &RigidTransform,
    q0: &JointConfig,
    opts: &IkOptions,
) -> Result<IkResult, KinematicsError> {
    if robot.link(end_link).is_none() {
        return Err(KinematicsError::UnknownLink {
            link: end_link.to_string(),
        });
    }
    q0.validate(robot, false)?;
    let position_only = opts.rot_tol.is_infinite();
    let n = robot.dof();

    let split = |e: &DVector<f64>| {
        let pos = e.rows(0, 3).norm();
        let rot = if position_only { 0.0 } else { e.rows(3, 3).norm() };
        (pos, rot)
    };
    let within = |pos: f64, rot: f64| pos < opts.pos_tol && (position_only || rot < opts.rot_tol);

    let mut q = robot.clamp_config(q0);
    let mut e = pose_error(robot, end_link, target, &q, position_only)?;
    let mut cost = e.norm();
    let mut trace = vec![cost];
    let mut lambda = opts.damping;
    let mut iterations = 0;

    for _ in 0..opts.max_iters {
        let (pos, rot) = split(&e);
        if within(pos, rot) || n == 0 {
            break;
        }
        iterations += 1;

        // Central differences on the error itself; evaluations may leave the
        // limit box so the derivative stays two-sided at a clamped joint.
        let mut jac = DMatrix::zeros(e.len(), n);
        for i in 0..n {
            let mut plus = q.clone();
            plus.values[i] += FD_STEP;
            let mut minus = q.clone();
            minus.values[i] -= FD_STEP;
            let ep = pose_error(robot, end_link, target, &plus, position_only)?;
            let em = pose_error(robot, end_link, target, &minus, position_only)?;
            jac.set_column(i, &((ep - em) / (2.0 * FD_STEP)));
        }

        // e(q + dq) ≈ e + J dq, so the Gauss-Newton step solves J dq = -e.
        let jt = jac.transpose();
        let a = &jt * &jac + DMatrix::identity(n, n) * (lambda * lambda);
        let b = &jt * (-&e);
        let Some(chol) = a.cholesky() else {
            lambda *= 2.0;
            continue;
        };
        let dq = chol.solve(&b);
        if dq.norm() < 1e-14 {
            break;
        }

        let mut candidate = q.clone();
        for (v, d) in candidate.values.iter_mut().zip(dq.iter()) {
            *v += d;
        }
        candidate = robot.clamp_config(&candidate);
        let e_new = pose_error(robot, end_link, target, &candidate, position_only)?;
        let cost_new = e_new.norm();
        if cost_new < cost {
            q = candidate;
            e = e_new;
            cost = cost_new;
            trace.push(cost);
            lambda = (lambda * 0.7).max(1e-9);
        } else {
            lambda *= 2.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    let (pos_residual, rot_residual) = split(&e);
    Ok(IkResult {
        converged: within(pos_residual, rot_residual),
        q,
        pos_residual,
        rot_residual,
        iterations,
        cost_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fk::link_pose;
    use crate::parse::parse_urdf;
    use nalgebra::Vector3;

    pub(crate) const TWO_R: &str = r#"<robot name="planar2r">
  <link name="base"/><link name="upper"/><link name="fore"/><link name="tip"/>
  <joint name="shoulder" type="revolute">
    <parent link="base"/><child link="upper"/>
    <axis xyz="0 0 1"/><limit lower="-3.1415926536" upper="3.1415926536"/>
  </joint>
  <joint name="elbow" type="revolute">
    <origin xyz="0.3 0 0"/><parent link="upper"/><child link="fore"/>
    <axis xyz="0 0 1"/><limit lower="-3.1415926536" upper="3.1415926536"/>
  </joint>
  <joint name="wrist" type="fixed">
    <origin xyz="0.2 0 0"/><parent link="fore"/><child link="tip"/>
  </joint>
</robot>"#;

    fn position_only() -> IkOptions {
        IkOptions {
            rot_tol: f64::INFINITY,
            pos_tol: 1e-6,
            ..IkOptions::default()
        }
    }

    /// Analytic two-link planar IK, elbow-down and elbow-up branches.
    fn two_r_closed_form(x: f64, y: f64) -> [(f64, f64); 2] {
        let (l1, l2) = (0.3, 0.2);
        let r2 = x * x + y * y;
        let c2 = ((r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
        let q2 = c2.acos();
        let mut out = [(0.0, 0.0); 2];
        for (k, q2) in [q2, -q2].into_iter().enumerate() {
            let q1 = y.atan2(x) - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos());
            out[k] = (q1, q2);
        }
        out
    }

    #[test]
    fn target_at_start_converges_in_zero_iterations() {
        let robot = parse_urdf(TWO_R).unwrap();
        let q0 = JointConfig::new(vec![0.4, -0.8]);
        let target = link_pose(&robot, &q0, "tip").unwrap();
        let r = ik_solve(&robot, "tip", &target, &q0, &IkOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.q, q0);
    }

    #[test]
    fn two_r_matches_closed_form() {
        let robot = parse_urdf(TWO_R).unwrap();
        let targets = [
            (0.35, 0.2),
            (0.2, -0.3),
            (-0.25, 0.25),
            (0.45, 0.05),
            (0.12, 0.12),
        ];
        for &(x, y) in &targets {
            let target = RigidTransform::from_translation(Vector3::new(x, y, 0.0));
            let q0 = JointConfig::new(vec![0.1, 0.1]);
            let r = ik_solve(&robot, "tip", &target, &q0, &position_only()).unwrap();
            assert!(r.converged, "({x}, {y}) residual {}", r.pos_residual);
            let tip = link_pose(&robot, &r.q, "tip").unwrap().translation;
            assert!((tip - target.translation).norm() < 1e-4);

            let branches = two_r_closed_form(x, y);
            let matches_branch = branches.iter().any(|&(q1, q2)| {
                let wrap = |a: f64| (a + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
                    - std::f64::consts::PI;
                wrap(r.q.values[0] - q1).abs() < 1e-3 && wrap(r.q.values[1] - q2).abs() < 1e-3
            });
            assert!(matches_branch, "({x}, {y}) -> {:?} vs {branches:?}", r.q.values);
        }
    }

    #[test]
    fn unreachable_target_returns_unconverged() {
        let robot = parse_urdf(TWO_R).unwrap();
        let target = RigidTransform::from_translation(Vector3::new(1.0, 0.0, 0.0));
        let r = ik_solve(
            &robot,
            "tip",
            &target,
            &JointConfig::zeros(2),
            &position_only(),
        )
        .unwrap();
        assert!(!r.converged);
        // Best effort: the arm stretches toward the target.
        assert!((r.pos_residual - 0.5).abs() < 1e-3, "{}", r.pos_residual);
    }

    #[test]
    fn cost_trace_is_non_increasing() {
        let robot = parse_urdf(TWO_R).unwrap();
        let target = RigidTransform::from_translation(Vector3::new(0.1, 0.4, 0.0));
        let r = ik_solve(
            &robot,
            "tip",
            &target,
            &JointConfig::zeros(2),
            &position_only(),
        )
        .unwrap();
        for w in r.cost_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn limits_are_respected() {
        let text = TWO_R.replace(
            "lower=\"-3.1415926536\" upper=\"3.1415926536\"",
            "lower=\"-0.5\" upper=\"0.5\"",
        );
        let robot = parse_urdf(&text).unwrap();
        let target = RigidTransform::from_translation(Vector3::new(-0.2, 0.4, 0.0));
        let r = ik_solve(
            &robot,
            "tip",
            &target,
            &JointConfig::zeros(2),
            &position_only(),
        )
        .unwrap();
        for &v in &r.q.values {
            assert!((-0.5..=0.5).contains(&v));
        }
    }

    #[test]
    fn unknown_end_link_errors() {
        let robot = parse_urdf(TWO_R).unwrap();
        assert!(matches!(
            ik_solve(
                &robot,
                "nope",
                &RigidTransform::identity(),
                &JointConfig::zeros(2),
                &IkOptions::default()
            ),
            Err(KinematicsError::UnknownLink { .. })
        ));
    }
}
