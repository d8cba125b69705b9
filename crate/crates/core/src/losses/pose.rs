use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Rig, RigidTransform};

/// Pose-consistency value with its translation and rotation parts.
///
/// `gimbal_lock` is set when any Euler extraction hit `|pitch| ≈ π/2`; the
/// value is still computed with roll fixed to 0 for those rotations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoseConsistency {
    pub value: f64,
    pub translation: f64,
    pub rotation: f64,
    pub gimbal_lock: bool,
}

/// Wraps an angle difference into `(-π, π]`.
fn wrap(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Expresses each camera's motion in the front camera's frame,
/// `E₁⁻¹ E_j T̂_j E_j⁻¹ E₁`.
pub fn to_front_frame(rig: &Rig, poses: &[RigidTransform]) -> Result<Vec<RigidTransform>> {
    if poses.len() != rig.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} poses for a rig of {} cameras",
            poses.len(),
            rig.len()
        )));
    }
    let e1 = &rig.front().extrinsics;
    Ok(rig
        .cameras()
        .iter()
        .zip(poses)
        .map(|(cam, pose)| cam.extrinsics.inverse().compose(e1).conjugate(pose))
        .collect())
}

/// Squared disagreement between the front camera's motion and every other
/// camera's motion mapped into the front frame: `α_t Σ‖t̂₁ − t̃_j‖²` plus
/// `α_r Σ` of squared ZYX Euler-angle differences (wrapped to `(-π, π]`).
pub fn pose_consistency(
    poses: &[RigidTransform],
    rig: &Rig,
    alpha_t: f64,
    alpha_r: f64,
) -> Result<PoseConsistency> {
    if rig.len() < 2 {
        return Err(Error::InvalidArgument(
            "pose consistency needs at least two cameras".into(),
        ));
    }
    let mapped = to_front_frame(rig, poses)?;
    let front = &poses[0];
    let e1 = front.euler_zyx();
    let mut gimbal_lock = e1.gimbal_lock;
    let (mut t_loss, mut r_loss) = (0.0, 0.0);
    for other in &mapped[1..] {
        t_loss += (front.translation() - other.translation()).norm_squared();
        let e = other.euler_zyx();
        gimbal_lock |= e.gimbal_lock;
        let (a, b) = (e1.angles, e.angles);
        for d in [a.0 - b.0, a.1 - b.1, a.2 - b.2] {
            r_loss += wrap(d).powi(2);
        }
    }
    Ok(PoseConsistency {
        value: alpha_t * t_loss + alpha_r * r_loss,
        translation: t_loss,
        rotation: r_loss,
        gimbal_lock,
    })
}
