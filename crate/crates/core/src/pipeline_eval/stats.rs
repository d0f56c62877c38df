use std::fmt::Write as _;

use super::align::{align_trajectories, TimedPoint};
use crate::error::{Error, Result};
use crate::flow_core::{TimedPose, VelocityEstimate};
use crate::simulator::GroundTruthSample;

/// Mean and (population) standard deviation of planar speed error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Compares every valid estimate with the truth velocity linearly
/// interpolated at the estimate's timestamp. Estimates outside the truth
/// span, or bracketed by a corner-flagged truth sample, are skipped.
pub fn velocity_error_stats(est: &[VelocityEstimate], truth: &[GroundTruthSample]) -> Result<ErrorStats> {
    let mut errors = Vec::with_capacity(est.len());
    for e in est.iter().filter(|e| e.is_valid()) {
        let i = truth.partition_point(|g| g.timestamp <= e.timestamp);
        if i == 0 {
            continue;
        }
        let a = &truth[i - 1];
        let (vx, vy) = if a.timestamp == e.timestamp {
            if a.corner_flag {
                continue;
            }
            (a.vx, a.vy)
        } else {
            let Some(b) = truth.get(i) else { continue };
            if a.corner_flag || b.corner_flag {
                continue;
            }
            let w = (e.timestamp - a.timestamp) / (b.timestamp - a.timestamp);
            (a.vx + w * (b.vx - a.vx), a.vy + w * (b.vy - a.vy))
        };
        errors.push((e.vx - vx).hypot(e.vy - vy));
    }
    if errors.is_empty() {
        return Err(Error::domain("no valid estimate overlaps the truth series"));
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    Ok(ErrorStats {
        mean,
        std: var.sqrt(),
        n: errors.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub stats: ErrorStats,
    pub n_valid: usize,
    pub n_invalid: usize,
    /// NaN when no pose series was supplied.
    pub alignment_rotation_rad: f64,
    /// NaN when no pose series was supplied.
    pub final_position_error_m: f64,
}

impl EvalReport {
    /// `metric,value` CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,value\n");
        let _ = writeln!(s, "mean_err,{}", self.stats.mean);
        let _ = writeln!(s, "std_err,{}", self.stats.std);
        let _ = writeln!(s, "n_valid,{}", self.n_valid);
        let _ = writeln!(s, "n_invalid,{}", self.n_invalid);
        let _ = writeln!(s, "alignment_rotation_rad,{}", self.alignment_rotation_rad);
        let _ = writeln!(s, "final_position_error_m,{}", self.final_position_error_m);
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "velocity error");
        let _ = writeln!(s, "  mean      {:.4} m/s", self.stats.mean);
        let _ = writeln!(s, "  std       {:.4} m/s", self.stats.std);
        let _ = writeln!(s, "  compared  {}", self.stats.n);
        let _ = writeln!(s, "estimates");
        let _ = writeln!(s, "  valid     {}", self.n_valid);
        let _ = writeln!(s, "  invalid   {}", self.n_invalid);
        let _ = writeln!(s, "trajectory");
        let _ = writeln!(s, "  rotation  {:.6} rad", self.alignment_rotation_rad);
        let _ = writeln!(s, "  final err {:.4} m", self.final_position_error_m);
        s
    }
}

/// Velocity statistics plus, when a pose series is given, the final position
/// error after bringing both trajectories to a common origin (and, with
/// `align`, the best-fit rotation).
pub fn evaluate(
    velocities: &[VelocityEstimate],
    poses: Option<&[TimedPose]>,
    truth: &[GroundTruthSample],
    align: bool,
) -> Result<EvalReport> {
    let stats = velocity_error_stats(velocities, truth)?;
    let n_valid = velocities.iter().filter(|v| v.is_valid()).count();
    let n_invalid = velocities.len() - n_valid;

    let (rotation, final_err) = match poses {
        None => (f64::NAN, f64::NAN),
        Some(poses) => {
            let reference: Vec<TimedPoint> = truth
                .iter()
                .map(|g| TimedPoint {
                    timestamp: g.timestamp,
                    x: g.pose.x,
                    y: g.pose.y,
                })
                .collect();
            let spacing = truth
                .windows(2)
                .map(|w| w[1].timestamp - w[0].timestamp)
                .fold(f64::INFINITY, f64::min);
            let tol = if spacing.is_finite() { 0.5 * spacing } else { 1e-3 };
            let al = align_trajectories(poses, &reference, tol, align)?;
            let &(ei, ri) = al.matches.last().expect("alignment has >= 2 matches");
            let p = al.poses[ei].pose;
            let r = reference[ri];
            (al.rotation, (p.x - r.x).hypot(p.y - r.y))
        }
    };

    Ok(EvalReport {
        stats,
        n_valid,
        n_invalid,
        alignment_rotation_rad: rotation,
        final_position_error_m: final_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_core::{EstimateStatus, Pose2D};

    fn truth() -> Vec<GroundTruthSample> {
        (0..=100)
            .map(|k| {
                let t = k as f64 * 0.1;
                GroundTruthSample {
                    timestamp: t,
                    pose: Pose2D { x: 0.5 * t, y: 0.0, heading: 0.0 },
                    vx: 0.5,
                    vy: 0.1 * t,
                    wz: 0.0,
                    z: 1.0,
                    corner_flag: (4.9..=5.1).contains(&t),
                }
            })
            .collect()
    }

    fn est_from_truth(offset: (f64, f64)) -> Vec<VelocityEstimate> {
        (0..100)
            .map(|k| {
                let t = k as f64 * 0.1 + 0.05;
                VelocityEstimate {
                    timestamp: t,
                    vx: 0.5 + offset.0,
                    vy: 0.1 * t + offset.1,
                    wz: 0.0,
                    z_used: 1.0,
                    inlier_count: 10,
                    valid_count: 10,
                    status: EstimateStatus::Valid,
                }
            })
            .collect()
    }

    #[test]
    fn exact_estimates() {
        let s = velocity_error_stats(&est_from_truth((0.0, 0.0)), &truth()).unwrap();
        assert!(s.mean < 1e-12 && s.std < 1e-12);
        // corner window [4.9, 5.1] removes the intervals touching it
        assert_eq!(s.n, 97);
    }

    #[test]
    fn constant_offset() {
        let s = velocity_error_stats(&est_from_truth((0.05, 0.0)), &truth()).unwrap();
        assert!((s.mean - 0.05).abs() < 1e-12);
        assert!(s.std < 1e-12);
    }

    #[test]
    fn invalid_and_out_of_span_ignored() {
        let mut e = est_from_truth((0.0, 0.0));
        e[3].status = EstimateStatus::Invalid;
        e[3].vx = 100.0;
        e.push(VelocityEstimate { timestamp: 50.0, vx: 9.0, ..e[0] });
        let s = velocity_error_stats(&e, &truth()).unwrap();
        assert!(s.mean < 1e-12);
        assert_eq!(s.n, 96);

        for v in &mut e {
            v.status = EstimateStatus::Invalid;
        }
        assert!(velocity_error_stats(&e, &truth()).is_err());
    }

    #[test]
    fn report_csv_columns() {
        let r = evaluate(&est_from_truth((0.0, 0.0)), None, &truth(), true).unwrap();
        let csv = r.to_csv();
        let keys: Vec<_> = csv.lines().map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(
            keys,
            ["metric", "mean_err", "std_err", "n_valid", "n_invalid", "alignment_rotation_rad", "final_position_error_m"]
        );
        assert!(r.final_position_error_m.is_nan());
    }
}
