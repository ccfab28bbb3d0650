//! Surface sampling of a posed robot model.
//!
//! The anchor cloud for world alignment comes from the robot's own collision
//! meshes, posed by forward kinematics at the default joint configuration.
//! Sampling is area-weighted and stratified over the cumulative face-area
//! table, so per-face counts track the area proportions to within a couple
//! of samples instead of multinomial noise.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector3;
use r2sim_assets::{load_mesh, TriangleMesh};
use r2sim_kinematics::{forward_kinematics, JointConfig, KinematicsError, RobotModel};
use r2sim_scene::RigidTransform;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::RegisterError;

/// A kinematic model paired with per-link collision meshes, keyed by link
/// name. Links without geometry are legal; they contribute no surface.
#[derive(Debug, Clone)]
pub struct RobotGeometry {
    pub model: RobotModel,
    pub meshes: BTreeMap<String, TriangleMesh>,
}

impl RobotGeometry {
    pub fn new(
        model: RobotModel,
        meshes: BTreeMap<String, TriangleMesh>,
    ) -> Result<Self, RegisterError> {
        model.validate()?;
        for (link, mesh) in &meshes {
            if model.link(link).is_none() {
                return Err(RegisterError::Kinematics(KinematicsError::UnknownLink {
                    link: link.clone(),
                }));
            }
            mesh.validate()?;
        }
        Ok(RobotGeometry { model, meshes })
    }

    /// Loads every link's `collision_mesh` OBJ relative to `base_dir`.
    pub fn load(model: RobotModel, base_dir: &Path) -> Result<Self, RegisterError> {
        let mut meshes = BTreeMap::new();
        for link in &model.links {
            if let Some(rel) = &link.collision_mesh {
                let mesh = load_mesh(&base_dir.join(rel))?;
                meshes.insert(link.name.clone(), mesh);
            }
        }
        RobotGeometry::new(model, meshes)
    }
}

/// `n` points sampled area-uniformly over the union of the robot's collision
/// meshes posed at `q`. Deterministic for a given `seed`.
pub fn sample_robot_pointcloud(
    robot: &RobotGeometry,
    q: &JointConfig,
    n: usize,
    seed: u64,
) -> Result<Vec<Vector3<f64>>, RegisterError> {
    q.validate(&robot.model, true)?;
    let poses = forward_kinematics(&robot.model, q)?;

    // Flattened (pose, triangle) list with a cumulative area table. Rigid
    // poses preserve area, so the unposed areas weight correctly.
    struct Face<'a> {
        pose: &'a RigidTransform,
        mesh: &'a TriangleMesh,
        face: usize,
    }
    let mut faces = Vec::new();
    let mut cumulative = Vec::new();
    let mut total = 0.0f64;
    for (link, mesh) in &robot.meshes {
        let pose = &poses[link];
        for face in 0..mesh.faces.len() {
            let area = mesh.face_area(face);
            if area <= 0.0 {
                continue;
            }
            total += area;
            faces.push(Face { pose, mesh, face });
            cumulative.push(total);
        }
    }
    if faces.is_empty() || total <= 0.0 {
        return Err(RegisterError::NoGeometry);
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let mut rng = StdRng::seed_from_u64(seed);
    let stratum = total / n as f64;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let u = (i as f64 + rng.random_range(0.0..1.0)) * stratum;
        let idx = cumulative.partition_point(|&c| c <= u).min(faces.len() - 1);
        let f = &faces[idx];
        let [a, b, c] = f.mesh.faces[f.face];
        let (va, vb, vc) = (
            f.mesh.vertices[a],
            f.mesh.vertices[b],
            f.mesh.vertices[c],
        );
        // Uniform barycentric draw via the square-root trick.
        let r1: f64 = rng.random_range(0.0..1.0);
        let r2: f64 = rng.random_range(0.0..1.0);
        let s = r1.sqrt();
        let p = va * (1.0 - s) + vb * (s * (1.0 - r2)) + vc * (s * r2);
        points.push(f.pose.apply(&p));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use r2sim_assets::box_mesh;
    use r2sim_kinematics::parse_urdf;

    fn cube_robot() -> RobotGeometry {
        let model = parse_urdf(
            r#"<robot name="cube"><link name="base"/></robot>"#,
        )
        .unwrap();
        let mut meshes = BTreeMap::new();
        meshes.insert("base".to_string(), box_mesh(Vector3::new(1.0, 1.0, 1.0)));
        RobotGeometry::new(model, meshes).unwrap()
    }

    #[test]
    fn unit_cube_face_counts_track_area() {
        let robot = cube_robot();
        let pts = sample_robot_pointcloud(&robot, &JointConfig::zeros(0), 6000, 3).unwrap();
        assert_eq!(pts.len(), 6000);
        // Classify each sample by the cube face it lies on.
        let mut counts = [0usize; 6];
        for p in &pts {
            let mut face = None;
            for axis in 0..3 {
                if (p[axis] - 0.5).abs() < 1e-9 {
                    face = Some(axis * 2);
                } else if (p[axis] + 0.5).abs() < 1e-9 {
                    face = Some(axis * 2 + 1);
                }
            }
            counts[face.expect("sample must lie on the cube surface")] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - 1000.0).abs() <= 50.0,
                "face {i}: {c} samples, expected 1000 within 5%"
            );
        }
    }

    #[test]
    fn zero_samples_give_an_empty_cloud() {
        let robot = cube_robot();
        let pts = sample_robot_pointcloud(&robot, &JointConfig::zeros(0), 0, 3).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn same_seed_reproduces_the_cloud() {
        let robot = cube_robot();
        let a = sample_robot_pointcloud(&robot, &JointConfig::zeros(0), 500, 9).unwrap();
        let b = sample_robot_pointcloud(&robot, &JointConfig::zeros(0), 500, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_robot_pointcloud(&robot, &JointConfig::zeros(0), 500, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn geometry_free_robot_is_an_error() {
        let model = parse_urdf(
            r#"<robot name="bare"><link name="base"/></robot>"#,
        )
        .unwrap();
        let robot = RobotGeometry::new(model, BTreeMap::new()).unwrap();
        let err = sample_robot_pointcloud(&robot, &JointConfig::zeros(0), 10, 0).unwrap_err();
        assert!(matches!(err, RegisterError::NoGeometry));
    }

    #[test]
    fn out_of_limit_configuration_is_rejected() {
        let model = parse_urdf(
            r#"<robot name="arm">
                 <link name="base"/><link name="tip"/>
                 <joint name="j" type="revolute">
                   <parent link="base"/><child link="tip"/>
                   <axis xyz="0 0 1"/><limit lower="-1" upper="1"/>
                 </joint>
               </robot>"#,
        )
        .unwrap();
        let mut meshes = BTreeMap::new();
        meshes.insert("tip".to_string(), box_mesh(Vector3::new(0.1, 0.1, 0.1)));
        let robot = RobotGeometry::new(model, meshes).unwrap();
        let err =
            sample_robot_pointcloud(&robot, &JointConfig::new(vec![2.0]), 10, 0).unwrap_err();
        assert!(matches!(
            err,
            RegisterError::Kinematics(KinematicsError::LimitViolation { .. })
        ));
    }

    #[test]
    fn meshes_for_unknown_links_are_rejected() {
        let model = parse_urdf(
            r#"<robot name="cube"><link name="base"/></robot>"#,
        )
        .unwrap();
        let mut meshes = BTreeMap::new();
        meshes.insert("ghost".to_string(), box_mesh(Vector3::new(1.0, 1.0, 1.0)));
        assert!(matches!(
            RobotGeometry::new(model, meshes),
            Err(RegisterError::Kinematics(KinematicsError::UnknownLink { .. }))
        ));
    }

    #[test]
    fn posed_links_move_the_samples() {
        let model = parse_urdf(
            r#"<robot name="arm">
                 <link name="base"/><link name="tip"/>
                 <joint name="j" type="prismatic">
                   <parent link="base"/><child link="tip"/>
                   <axis xyz="0 0 1"/><limit lower="0" upper="1"/>
                 </joint>
               </robot>"#,
        )
        .unwrap();
        let mut meshes = BTreeMap::new();
        meshes.insert("tip".to_string(), box_mesh(Vector3::new(0.2, 0.2, 0.2)));
        let robot = RobotGeometry::new(model, meshes).unwrap();
        let home = sample_robot_pointcloud(&robot, &JointConfig::new(vec![0.0]), 100, 4).unwrap();
        let lifted =
            sample_robot_pointcloud(&robot, &JointConfig::new(vec![0.5]), 100, 4).unwrap();
        for (a, b) in home.iter().zip(&lifted) {
            let d = b - a;
            assert!((d.x).abs() < 1e-12 && (d.y).abs() < 1e-12);
            assert!((d.z - 0.5).abs() < 1e-12);
        }
    }
}
