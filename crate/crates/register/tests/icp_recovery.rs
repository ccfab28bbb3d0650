//! Recovery of known rigid transforms from noisy robot surface clouds. The
//! oracle is the generating transform itself.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::Vector3;
use r2sim_assets::box_mesh;
use r2sim_kinematics::{parse_urdf, JointConfig};
use r2sim_register::{icp_align, sample_robot_pointcloud, IcpParams, RobotGeometry};
use r2sim_scene::{rotation_log, RigidTransform};
use r2sim_testkit::{random_rigid, TestRng};

const ARM_URDF: &str = r#"
<robot name="testarm">
  <link name="base"/>
  <link name="upper"/>
  <joint name="shoulder" type="revolute">
    <origin xyz="0 0 0.15" rpy="0 0 0"/>
    <parent link="base"/>
    <child link="upper"/>
    <axis xyz="1 0 0"/>
    <limit lower="-1.57" upper="1.57"/>
  </joint>
</robot>
"#;

fn test_arm() -> RobotGeometry {
    let model = parse_urdf(ARM_URDF).unwrap();
    let mut meshes = BTreeMap::new();
    meshes.insert(
        "base".to_string(),
        box_mesh(Vector3::new(0.25, 0.2, 0.3)),
    );
    // Long thin forearm breaks the base box's near-symmetries.
    meshes.insert(
        "upper".to_string(),
        box_mesh(Vector3::new(0.06, 0.5, 0.08)).translated(&Vector3::new(0.0, 0.2, 0.1)),
    );
    RobotGeometry::new(model, meshes).unwrap()
}

fn rotation_error_deg(a: &RigidTransform, b: &RigidTransform) -> f64 {
    rotation_log(&(a.rotation * b.rotation.transpose()))
        .norm()
        .to_degrees()
}

#[test]
fn noisy_robot_clouds_recover_the_generating_transform() {
    let robot = test_arm();
    let q = JointConfig::new(vec![0.4]);
    let mut rng = TestRng::new(2024);
    let mut successes = 0;
    let trials = 20;

    for trial in 0..trials {
        let src = sample_robot_pointcloud(&robot, &q, 2000, 100 + trial).unwrap();
        let truth = random_rigid(20f64.to_radians(), 0.1, &mut rng);
        let dst: Vec<Vector3<f64>> = src
            .iter()
            .map(|p| {
                truth.apply(p)
                    + Vector3::new(
                        rng.normal() * 1e-3,
                        rng.normal() * 1e-3,
                        rng.normal() * 1e-3,
                    )
            })
            .collect();

        let started = Instant::now();
        let res = icp_align(
            &src,
            &dst,
            &RigidTransform::identity(),
            &IcpParams::default(),
        )
        .unwrap();
        let elapsed = started.elapsed();
        assert!(
            elapsed.as_secs_f64() < 2.0,
            "trial {trial}: ICP took {elapsed:?}"
        );

        let rot_err = rotation_error_deg(&res.transform, &truth);
        let trans_err = (res.transform.translation - truth.translation).norm();
        if rot_err < 0.2 && trans_err < 2e-3 {
            successes += 1;
        } else {
            eprintln!(
                "trial {trial}: rotation error {rot_err:.4} deg, translation error {:.5} m",
                trans_err
            );
        }
    }
    assert!(
        successes >= 19,
        "only {successes}/{trials} transforms recovered"
    );
}

#[test]
fn recovery_reports_convergence_and_small_residual() {
    let robot = test_arm();
    let q = JointConfig::new(vec![-0.3]);
    let src = sample_robot_pointcloud(&robot, &q, 1500, 7).unwrap();
    let mut rng = TestRng::new(77);
    let truth = random_rigid(15f64.to_radians(), 0.08, &mut rng);
    let dst: Vec<Vector3<f64>> = src.iter().map(|p| truth.apply(p)).collect();

    let res = icp_align(
        &src,
        &dst,
        &RigidTransform::identity(),
        &IcpParams::default(),
    )
    .unwrap();
    assert!(res.converged, "noise-free recovery must converge");
    assert!(res.rms_residual < 1e-6);
    assert!(res.iterations_used <= IcpParams::default().max_iterations);
    res.transform.validate().unwrap();
}
