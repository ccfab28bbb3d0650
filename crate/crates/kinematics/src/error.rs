use thiserror::Error;

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("urdf is not well-formed xml: {0}")]
    Xml(#[from] roxmltree::Error),

    #[error("urdf: {0}")]
    Structure(String),

    #[error("urdf: joint {joint:?} has unknown type {kind:?}")]
    UnknownJointType { joint: String, kind: String },

    #[error("urdf: movable joint {joint:?} has no limits")]
    MissingLimits { joint: String },

    #[error("joint graph is not a tree: {reason}")]
    NotATree { reason: String },

    #[error("unknown link {link:?}")]
    UnknownLink { link: String },

    #[error("config has {got} values but the robot has {want} movable joints")]
    ConfigSize { got: usize, want: usize },

    #[error("joint {joint:?} value {value} outside [{lo}, {hi}]")]
    LimitViolation {
        joint: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("ik for waypoint {index} did not converge (pos {pos_residual:.3e} m, rot {rot_residual:.3e} rad)")]
    WaypointIk {
        index: usize,
        pos_residual: f64,
        rot_residual: f64,
    },

    #[error("waypoint list is empty")]
    NoWaypoints,

    #[error("step_time must be positive, got {0}")]
    BadStepTime(f64),
}
