//! Closed-form planar trajectories with analytic body-frame velocities.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::flow_core::{normalize_angle, Pose2D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryKind {
    /// Counter-clockwise circle about the origin starting at `(radius, 0)`.
    Circle { radius: f64, period: f64 },
    /// Counter-clockwise square with one corner at the origin, first edge
    /// along +x. Turns at the corners are instantaneous.
    Square { side: f64, speed: f64 },
    /// Constant world velocity from the origin.
    Line { vx: f64, vy: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YawMode {
    /// Heading stays 0; the camera translates without turning.
    Fixed,
    /// Heading follows the direction of travel.
    Tangent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub yaw_mode: YawMode,
    pub duration: f64,
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be > 0, got {v}")))
            }
        };
        positive("duration", self.duration)?;
        match self.kind {
            TrajectoryKind::Circle { radius, period } => {
                positive("radius", radius)?;
                positive("period", period)
            }
            TrajectoryKind::Square { side, speed } => {
                positive("side", side)?;
                positive("speed", speed)
            }
            TrajectoryKind::Line { vx, vy } => {
                if vx.is_finite() && vy.is_finite() {
                    Ok(())
                } else {
                    Err(Error::domain("line velocity must be finite"))
                }
            }
        }
    }

    /// Times of the instantaneous direction changes within the duration.
    pub fn corner_times(&self) -> Vec<f64> {
        match self.kind {
            TrajectoryKind::Square { side, speed } => {
                let leg = side / speed;
                (1..)
                    .map(|k| k as f64 * leg)
                    .take_while(|&t| t <= self.duration)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn path_length(&self) -> f64 {
        match self.kind {
            TrajectoryKind::Circle { radius, period } => 2.0 * PI * radius / period * self.duration,
            TrajectoryKind::Square { speed, .. } => speed * self.duration,
            TrajectoryKind::Line { vx, vy } => vx.hypot(vy) * self.duration,
        }
    }
}

/// Analytic state of the vehicle; velocities are in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthSample {
    pub timestamp: f64,
    pub pose: Pose2D,
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
    pub z: f64,
    /// Set near a velocity discontinuity (square corners).
    pub corner_flag: bool,
}

fn body_from_world(heading: f64, (wx, wy): (f64, f64)) -> (f64, f64) {
    let (s, c) = heading.sin_cos();
    (c * wx + s * wy, -s * wx + c * wy)
}

/// Closed-form state at time `t`, flying at constant height `altitude`.
pub fn trajectory_state(spec: &TrajectorySpec, altitude: f64, t: f64) -> Result<GroundTruthSample> {
    const EPS: f64 = 1e-9;
    if !(t >= -EPS && t <= spec.duration + EPS) {
        return Err(Error::domain(format!("t = {t} outside [0, {}]", spec.duration)));
    }
    let tangent = spec.yaw_mode == YawMode::Tangent;
    let mut corner_flag = false;

    let (position, world_vel, travel_heading, yaw_rate) = match spec.kind {
        TrajectoryKind::Circle { radius, period } => {
            let w = 2.0 * PI / period;
            let (s, c) = (w * t).sin_cos();
            (
                (radius * c, radius * s),
                (-radius * w * s, radius * w * c),
                w * t + FRAC_PI_2,
                w,
            )
        }
        TrajectoryKind::Line { vx, vy } => {
            let heading = if vx == 0.0 && vy == 0.0 { 0.0 } else { vy.atan2(vx) };
            ((vx * t, vy * t), (vx, vy), heading, 0.0)
        }
        TrajectoryKind::Square { side, speed } => {
            let s = (speed * t).rem_euclid(4.0 * side);
            let edge = ((s / side).floor() as usize).min(3);
            let along = s - edge as f64 * side;
            corner_flag = along < EPS * side || side - along < EPS * side;
            const CORNERS: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
            const DIRS: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
            let (c, d) = (CORNERS[edge], DIRS[edge]);
            (
                (c.0 * side + along * d.0, c.1 * side + along * d.1),
                (speed * d.0, speed * d.1),
                edge as f64 * FRAC_PI_2,
                0.0,
            )
        }
    };

    let (heading, wz) = if tangent {
        (normalize_angle(travel_heading), yaw_rate)
    } else {
        (0.0, 0.0)
    };
    let (vx, vy) = body_from_world(heading, world_vel);
    Ok(GroundTruthSample {
        timestamp: t,
        pose: Pose2D {
            x: position.0,
            y: position.1,
            heading,
        },
        vx,
        vy,
        wz,
        z: altitude,
        corner_flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: TrajectoryKind, yaw_mode: YawMode) -> TrajectorySpec {
        TrajectorySpec {
            kind,
            yaw_mode,
            duration: 20.0,
        }
    }

    #[test]
    fn circle_start() {
        let s = spec(TrajectoryKind::Circle { radius: 1.0, period: 2.0 * PI }, YawMode::Tangent);
        let g = trajectory_state(&s, 1.0, 0.0).unwrap();
        assert!((g.pose.x - 1.0).abs() < 1e-15 && g.pose.y.abs() < 1e-15);
        assert!((g.vx.hypot(g.vy) - 1.0).abs() < 1e-12);
        assert!((g.vx - 1.0).abs() < 1e-12, "tangent yaw: all forward motion");
        assert!((g.wz - 1.0).abs() < 1e-12);

        let s = spec(TrajectoryKind::Circle { radius: 1.0, period: 2.0 * PI }, YawMode::Fixed);
        let g = trajectory_state(&s, 1.0, 0.0).unwrap();
        assert!(g.vx.abs() < 1e-12 && (g.vy - 1.0).abs() < 1e-12 && g.wz == 0.0);
    }

    #[test]
    fn line() {
        let s = spec(TrajectoryKind::Line { vx: 0.5, vy: 0.0 }, YawMode::Fixed);
        let g = trajectory_state(&s, 2.0, 2.0).unwrap();
        assert_eq!((g.pose.x, g.pose.y), (1.0, 0.0));
        assert_eq!((g.vx, g.vy, g.z), (0.5, 0.0, 2.0));
    }

    #[test]
    fn square_edges() {
        let s = spec(TrajectoryKind::Square { side: 2.0, speed: 1.0 }, YawMode::Tangent);
        let g = trajectory_state(&s, 1.0, 1.0).unwrap();
        assert!((g.vx.hypot(g.vy) - 1.0).abs() < 1e-12 && g.wz == 0.0 && !g.corner_flag);
        let g = trajectory_state(&s, 1.0, 3.0).unwrap();
        assert!((g.pose.x - 2.0).abs() < 1e-12 && (g.pose.y - 1.0).abs() < 1e-12);
        assert!((g.pose.heading - FRAC_PI_2).abs() < 1e-12);
        assert!(trajectory_state(&s, 1.0, 2.0).unwrap().corner_flag);
        assert!(trajectory_state(&s, 1.0, 8.0).unwrap().corner_flag);
        assert_eq!(s.corner_times()[..4], [2.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn outside_duration() {
        let s = spec(TrajectoryKind::Line { vx: 1.0, vy: 0.0 }, YawMode::Fixed);
        assert!(trajectory_state(&s, 1.0, -0.1).is_err());
        assert!(trajectory_state(&s, 1.0, 20.1).is_err());
    }

    #[test]
    fn derivatives_match_positions() {
        // Central differences of the analytic positions reproduce the
        // analytic velocities.
        let dt = 1.0 / 30.0;
        for s in [
            spec(TrajectoryKind::Circle { radius: 1.0, period: 12.0 }, YawMode::Tangent),
            spec(TrajectoryKind::Circle { radius: 2.0, period: 9.0 }, YawMode::Fixed),
            spec(TrajectoryKind::Square { side: 2.0, speed: 0.5 }, YawMode::Tangent),
            spec(TrajectoryKind::Line { vx: 0.3, vy: -0.2 }, YawMode::Tangent),
        ] {
            for k in 1..500 {
                let t = k as f64 * dt;
                if t + dt > s.duration {
                    break;
                }
                let near_corner = s.corner_times().iter().any(|&c| (c - t).abs() <= dt + 1e-9);
                if near_corner {
                    continue;
                }
                let a = trajectory_state(&s, 1.0, t - 1e-5).unwrap();
                let b = trajectory_state(&s, 1.0, t + 1e-5).unwrap();
                let g = trajectory_state(&s, 1.0, t).unwrap();
                let world = ((b.pose.x - a.pose.x) / 2e-5, (b.pose.y - a.pose.y) / 2e-5);
                let (bx, by) = body_from_world(g.pose.heading, world);
                let speed = g.vx.hypot(g.vy);
                assert!((bx - g.vx).abs() <= 1e-6 * speed.max(1.0), "{s:?} t={t}");
                assert!((by - g.vy).abs() <= 1e-6 * speed.max(1.0), "{s:?} t={t}");
            }
        }
    }
}
