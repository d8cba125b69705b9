//! Pinhole cameras, SE(3) rigid transforms and the multi-camera rig.
//!
//! Conventions used throughout the crate:
//! - camera frame: x right, y down, z forward (optical axis);
//! - extrinsics `E_i` map camera-i coordinates into the shared body frame;
//! - pixel `(u, v)` is `(column, row)`, origin at the center of the top-left pixel.

mod camera;
mod rig;
mod transform;

pub use camera::{Intrinsics, DEPTH_EPSILON};
pub use rig::{
    load_poses, poses_to_json, Camera, CameraConfig, ContextKind, MatrixRows, PoseEntry,
    PoseSetConfig, Rig, RigConfig, CONFIG_ROTATION_TOLERANCE,
};
pub use transform::{
    EulerZyx, RigidTransform, DRIFT_TOLERANCE, ORTHONORMAL_TOLERANCE, SMALL_ANGLE,
};
