//! Pixel motion to metric velocity through the pinhole model, detectable
//! speed limits, and planar dead reckoning.

use crate::block_match::MatchParams;
use crate::error::{Error, Result};
use crate::flow_core::{
    normalize_angle, CameraIntrinsics, EstimateStatus, Pose2D, RigidTransform2D, VelocityEstimate,
};

/// Scales a roll/pitch-compensated image transform to body-frame velocity.
///
/// Ground motion is opposite to image motion: `vx = -(tx / f) z / dt` and
/// likewise for `vy`. The image rotates opposite to the vehicle too, so the
/// yaw rate is `-theta / dt`.
pub fn flow_to_velocity(
    xf: &RigidTransform2D,
    z: f64,
    dt: f64,
    timestamp: f64,
    cam: &CameraIntrinsics,
    (inlier_count, valid_count): (usize, usize),
) -> Result<VelocityEstimate> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("ground distance must be > 0, got {z}")));
    }
    if !(dt > 0.0) {
        return Err(Error::domain(format!("dt must be > 0, got {dt}")));
    }
    Ok(VelocityEstimate {
        timestamp,
        vx: -(xf.tx / cam.focal_px) * z / dt,
        vy: -(xf.ty / cam.focal_px) * z / dt,
        wz: -xf.theta / dt,
        z_used: z,
        inlier_count,
        valid_count,
        status: EstimateStatus::Valid,
    })
}

/// Smallest non-zero and largest representable ground speed for a matcher
/// configuration at ground distance `z` and frame rate `fps`.
pub fn velocity_envelope(
    cam: &CameraIntrinsics,
    z: f64,
    fps: f64,
    params: &MatchParams,
) -> Result<(f64, f64)> {
    if !(z > 0.0) || !(fps > 0.0) {
        return Err(Error::domain(format!("z ({z}) and fps ({fps}) must be > 0")));
    }
    if !(params.step >= 1 && params.step < params.search_range) {
        return Err(Error::domain(format!(
            "step {} must be positive and below search range {}",
            params.step, params.search_range
        )));
    }
    // Multiply before dividing so round numbers stay exact.
    let v_min = params.step as f64 * z * fps / cam.focal_px;
    let v_max = params.search_range as f64 * z * fps / cam.focal_px;
    Ok((v_min, v_max))
}

/// Advances `pose` by one body-frame velocity sample using the heading at the
/// middle of the step.
pub fn integrate_pose(pose: &Pose2D, v: &VelocityEstimate, dt: f64) -> Pose2D {
    let mid = pose.heading + 0.5 * v.wz * dt;
    let (s, c) = mid.sin_cos();
    let (bx, by) = (v.vx * dt, v.vy * dt);
    Pose2D {
        x: pose.x + c * bx - s * by,
        y: pose.y + s * bx + c * by,
        heading: normalize_angle(pose.heading + v.wz * dt),
    }
}
