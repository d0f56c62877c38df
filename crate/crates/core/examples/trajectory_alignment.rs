//! Align a dead-reckoned track to a GPS-style reference given in degrees.

use egoflow::pipeline_eval::{align_trajectories, geodetic_to_local, TimedPoint};
use egoflow::{Pose2D, TimedPose};

fn main() -> egoflow::Result<()> {
    let (lat0, lon0) = (50.0, 14.0);
    // Reference: an L-shaped walk, 40 m north then 30 m east, one fix a second.
    let mut reference = Vec::new();
    let mut est = Vec::new();
    for k in 0..=70 {
        let (east, north) = if k <= 40 { (0.0, k as f64) } else { ((k - 40) as f64, 40.0) };
        let lat = lat0 + north / 111_200.0;
        let lon = lon0 + east / (111_200.0 * lat0.to_radians().cos());
        let (x, y) = geodetic_to_local(lat, lon, lat0, lon0)?;
        reference.push(TimedPoint { timestamp: k as f64, x, y });
        // The estimate starts heading along its own x axis and drifts.
        est.push(TimedPose {
            timestamp: k as f64,
            pose: Pose2D::new(north * 1.01, -east * 0.99, 0.0),
        });
    }

    let al = align_trajectories(&est, &reference, 0.1, true)?;
    let last = al.poses.last().unwrap().pose;
    let r = reference.last().unwrap();
    println!("rotation {:.2} deg, rms residual {:.3} m", al.rotation.to_degrees(), al.rms_residual);
    println!("final point ({:.2}, {:.2}) vs reference ({:.2}, {:.2})", last.x, last.y, r.x, r.y);
    Ok(())
}
