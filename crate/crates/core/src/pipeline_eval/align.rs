use crate::error::{Error, Result};
use crate::flow_core::{normalize_angle, Pose2D, TimedPose};
use crate::motion_model::fit_rotation;

/// A reference position (ground truth or converted GPS fix).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPoint {
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// The estimated poses expressed in the reference frame.
    pub poses: Vec<TimedPose>,
    pub rotation: f64,
    /// Applied after the rotation: `aligned = R * p + translation`.
    pub translation: (f64, f64),
    /// RMS position error over the matched pairs.
    pub rms_residual: f64,
    /// `(estimate index, reference index)` of every matched pair, in order.
    pub matches: Vec<(usize, usize)>,
}

fn nearest(reference: &[TimedPoint], t: f64) -> Option<usize> {
    let i = reference.partition_point(|r| r.timestamp < t);
    [i.checked_sub(1), (i < reference.len()).then_some(i)]
        .into_iter()
        .flatten()
        .min_by(|&a, &b| (reference[a].timestamp - t).abs().total_cmp(&(reference[b].timestamp - t).abs()))
}

/// Brings `est` onto `reference`: both are shifted so the first matched pair
/// coincides, then (if `rotate`) the rotation about that point minimising
/// the summed squared position error is applied.
///
/// Pairs are formed by nearest timestamp within `tol` seconds; `reference`
/// must be sorted by time.
pub fn align_trajectories(
    est: &[TimedPose],
    reference: &[TimedPoint],
    tol: f64,
    rotate: bool,
) -> Result<Alignment> {
    let matches: Vec<(usize, usize)> = est
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            nearest(reference, p.timestamp)
                .filter(|&j| (reference[j].timestamp - p.timestamp).abs() <= tol)
                .map(|j| (i, j))
        })
        .collect();
    if matches.len() < 2 {
        return Err(Error::domain(format!(
            "{} matched samples within {tol} s, need 2",
            matches.len()
        )));
    }

    let (e0, r0) = matches[0];
    let eo = (est[e0].pose.x, est[e0].pose.y);
    let ro = (reference[r0].x, reference[r0].y);
    let rel = |&(i, j): &(usize, usize)| {
        (
            (est[i].pose.x - eo.0, est[i].pose.y - eo.1),
            (reference[j].x - ro.0, reference[j].y - ro.1),
        )
    };
    let rotation = if rotate {
        fit_rotation(matches.iter().map(rel)).unwrap_or(0.0)
    } else {
        0.0
    };

    let (s, c) = rotation.sin_cos();
    let translation = (ro.0 - (c * eo.0 - s * eo.1), ro.1 - (s * eo.0 + c * eo.1));
    let poses: Vec<TimedPose> = est
        .iter()
        .map(|p| TimedPose {
            timestamp: p.timestamp,
            pose: Pose2D {
                x: c * p.pose.x - s * p.pose.y + translation.0,
                y: s * p.pose.x + c * p.pose.y + translation.1,
                heading: normalize_angle(p.pose.heading + rotation),
            },
        })
        .collect();

    let sq: f64 = matches
        .iter()
        .map(|&(i, j)| (poses[i].pose.x - reference[j].x).powi(2) + (poses[i].pose.y - reference[j].y).powi(2))
        .sum();

    Ok(Alignment {
        rms_residual: (sq / matches.len() as f64).sqrt(),
        poses,
        rotation,
        translation,
        matches,
    })
}
