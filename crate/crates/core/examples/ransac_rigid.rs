//! Fit a rotation + translation to a 30x30 motion field where most vectors
//! are garbage.

use egoflow::{ransac_iterations, ransac_rigid, CameraIntrinsics, FlowField, MotionVector, RansacParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> egoflow::Result<()> {
    let cam = CameraIntrinsics::centered(640.0, 480, 480)?;
    let (theta, tx, ty) = (0.02f64, 5.0, -3.0);
    let (s, c) = theta.sin_cos();
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let mut field = FlowField::zeros(1, 1.0 / 30.0, 30, 30, 16);
    for k in 0..900 {
        let (u, v) = field.block_center(k % 30, k / 30);
        let (x, y) = (u - cam.cx, v - cam.cy);
        field.vectors[k] = if rng.random_bool(0.8) {
            MotionVector::new(rng.random_range(-64..=64), rng.random_range(-64..=64), 0)
        } else {
            let du = (c * x - s * y + tx - x).round() as i32;
            let dv = (s * x + c * y + ty - y).round() as i32;
            MotionVector::new(du, dv, 0)
        };
    }

    let fit = ransac_rigid(&field, &cam, &RansacParams::default())?;
    let xf = fit.transform;
    println!("true   theta {theta:.4} t ({tx:.2}, {ty:.2})");
    println!("fitted theta {:.4} t ({:.2}, {:.2})", xf.theta, xf.tx, xf.ty);
    println!("{} inliers of 900", fit.inlier_count);
    println!(
        "iterations for 80% outliers at 0.99: {}",
        ransac_iterations(0.8, 2, 0.99)?
    );
    Ok(())
}
