//! URDF parsing into a kinematic tree, forward kinematics, damped-least-
//! squares inverse kinematics, and time-parameterized joint trajectories.
//!
//! Joint configurations index the movable joints in document order. All
//! poses are expressed in the root link's frame.

mod error;
mod fk;
mod ik;
mod model;
mod parse;
mod traj;

pub use error::KinematicsError;
pub use fk::{forward_kinematics, link_pose};
pub use ik::{ik_solve, IkOptions, IkResult};
pub use model::{Inertial, Joint, JointConfig, JointKind, Link, RobotModel};
pub use parse::parse_urdf;
pub use traj::{plan_linear, JointTrajectory, PlanOptions};
