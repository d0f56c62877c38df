//! End-to-end estimation over a motion-vector stream and evaluation against
//! ground truth.

mod align;
mod geodesy;
mod stats;

pub use align::{align_trajectories, Alignment, TimedPoint};
pub use geodesy::{geodetic_to_local, meridional_radius, prime_vertical_radius, WGS84_A, WGS84_F};
pub use stats::{evaluate, velocity_error_stats, ErrorStats, EvalReport};

use rayon::prelude::*;

use crate::block_match::MatchParams;
use crate::error::{Error, Result};
use crate::flow_core::{
    CameraIntrinsics, EstimateStatus, FlowField, GyroSample, Pose2D, RangeSample, RigidTransform2D,
    TimedPose, VelocityEstimate,
};
use crate::metric_scale::{flow_to_velocity, integrate_pose};
use crate::motion_model::{average_gyro, compensate_rotation, ransac_rigid, RansacParams};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub cam: CameraIntrinsics,
    /// Matcher settings used to produce the stream (carried for reporting
    /// and for the CLI; estimation itself only consumes the vectors).
    pub match_params: MatchParams,
    pub ransac: RansacParams,
    pub compensation_enabled: bool,
}

impl PipelineConfig {
    pub fn new(cam: CameraIntrinsics) -> Self {
        PipelineConfig {
            cam,
            match_params: MatchParams::default(),
            ransac: RansacParams::default(),
            compensation_enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// One estimate per consecutive frame pair, stamped at the interval
    /// midpoint.
    pub velocities: Vec<VelocityEstimate>,
    /// The starting pose at the first frame, then one pose per frame.
    pub poses: Vec<TimedPose>,
}

/// What the per-interval stage produced before the sequential fold.
struct IntervalResult {
    t0: f64,
    t1: f64,
    outcome: std::result::Result<(RigidTransform2D, usize), usize>,
    valid_count: usize,
    degraded_rates: bool,
    /// Ground distance from a sample close to the interval, if any.
    range: Option<f64>,
}

fn nearest_usable_range(range: &[RangeSample], t: f64) -> Option<&RangeSample> {
    range
        .iter()
        .filter(|r| r.is_usable())
        .min_by(|a, b| (a.timestamp - t).abs().total_cmp(&(b.timestamp - t).abs()))
}

/// The translation and rotation of one frame pair, compensated for
/// roll/pitch when enabled. Pure, so intervals can run in parallel.
fn estimate_interval(
    field: &FlowField,
    t0: f64,
    t1: f64,
    gyro: &[GyroSample],
    range: &[RangeSample],
    cfg: &PipelineConfig,
) -> IntervalResult {
    let dt = t1 - t0;
    let mid = 0.5 * (t0 + t1);
    let valid_count = field.valid_count();
    let range_z = nearest_usable_range(range, mid)
        .filter(|r| (r.timestamp - mid).abs() <= dt)
        .map(|r| r.z);

    let mut degraded_rates = false;
    let outcome = match ransac_rigid(field, &cfg.cam, &cfg.ransac) {
        Err(Error::NoConsensus { best, .. }) => Err(best),
        Err(_) => Err(0),
        Ok(fit) => {
            let xf = fit.transform;
            if cfg.compensation_enabled {
                let rates = if gyro.is_empty() {
                    degraded_rates = true;
                    Ok((0.0, 0.0, 0.0))
                } else {
                    average_gyro(gyro, t0, t1)
                };
                rates
                    .and_then(|(wx, wy, _)| compensate_rotation((xf.tx, xf.ty), (wx, wy), dt, &cfg.cam))
                    .map(|(tx, ty)| (RigidTransform2D { tx, ty, ..xf }, fit.inlier_count))
                    .map_err(|_| fit.inlier_count)
            } else {
                Ok((xf, fit.inlier_count))
            }
        }
    };
    IntervalResult {
        t0,
        t1,
        outcome,
        valid_count,
        degraded_rates,
        range: range_z,
    }
}

/// Runs flow -> RANSAC -> compensation -> metric scaling -> integration.
///
/// `fields[i]` holds the motion from frame `i - 1` to frame `i`; the vectors
/// of `fields[0]` are never used. Intervals without consensus (or with an
/// unusable rotation or range) produce an [`EstimateStatus::Invalid`]
/// estimate carrying the last valid velocity, and leave the pose unchanged.
pub fn run_pipeline(
    fields: &[FlowField],
    gyro: &[GyroSample],
    range: &[RangeSample],
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    if fields.is_empty() {
        return Err(Error::domain("empty motion-vector stream"));
    }
    if fields.len() < 2 {
        return Err(Error::domain("need at least two frames"));
    }
    for w in fields.windows(2) {
        if !(w[1].timestamp > w[0].timestamp) {
            return Err(Error::domain(format!(
                "frame {} timestamp {} does not follow {}",
                w[1].frame_index, w[1].timestamp, w[0].timestamp
            )));
        }
    }

    let intervals: Vec<IntervalResult> = (1..fields.len())
        .into_par_iter()
        .map(|i| {
            estimate_interval(
                &fields[i],
                fields[i - 1].timestamp,
                fields[i].timestamp,
                gyro,
                range,
                cfg,
            )
        })
        .collect();

    let mut velocities = Vec::with_capacity(intervals.len());
    let mut poses = Vec::with_capacity(fields.len());
    let mut pose = Pose2D::default();
    poses.push(TimedPose {
        timestamp: fields[0].timestamp,
        pose,
    });
    let mut last_valid: Option<VelocityEstimate> = None;
    let mut last_z: Option<f64> = None;

    for iv in intervals {
        let dt = iv.t1 - iv.t0;
        let mid = 0.5 * (iv.t0 + iv.t1);
        let (z, stale_range) = match iv.range {
            Some(z) => (Some(z), false),
            None => (
                last_z.or_else(|| nearest_usable_range(range, mid).map(|r| r.z)),
                true,
            ),
        };

        let estimate = match (iv.outcome, z) {
            (Ok((xf, inliers)), Some(z)) => {
                flow_to_velocity(&xf, z, dt, mid, &cfg.cam, (inliers, iv.valid_count)).ok()
            }
            _ => None,
        };

        let est = match estimate {
            Some(mut v) => {
                if stale_range || iv.degraded_rates {
                    v.status = EstimateStatus::Degraded;
                }
                if !stale_range {
                    last_z = Some(v.z_used);
                }
                last_valid = Some(v);
                pose = integrate_pose(&pose, &v, dt);
                v
            }
            None => {
                let carried = last_valid.unwrap_or(VelocityEstimate {
                    timestamp: mid,
                    vx: 0.0,
                    vy: 0.0,
                    wz: 0.0,
                    z_used: 0.0,
                    inlier_count: 0,
                    valid_count: 0,
                    status: EstimateStatus::Invalid,
                });
                let inliers = match iv.outcome {
                    Ok((_, n)) | Err(n) => n,
                };
                VelocityEstimate {
                    timestamp: mid,
                    inlier_count: inliers,
                    valid_count: iv.valid_count,
                    status: EstimateStatus::Invalid,
                    ..carried
                }
            }
        };
        velocities.push(est);
        poses.push(TimedPose {
            timestamp: iv.t1,
            pose,
        });
    }

    Ok(PipelineOutput { velocities, poses })
}
