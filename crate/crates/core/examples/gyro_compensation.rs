//! Remove the image shift caused by a pitch rate from a measured
//! translation.

use egoflow::{average_gyro, compensate_rotation, CameraIntrinsics, GyroSample};

fn main() -> egoflow::Result<()> {
    let cam = CameraIntrinsics::centered(640.0, 480, 480)?;
    let dt = 1.0 / 30.0;

    // 300 Hz gyro, pitching at 0.3 rad/s
    let gyro: Vec<GyroSample> = (0..=30)
        .map(|j| GyroSample {
            timestamp: j as f64 / 300.0,
            wx: 0.0,
            wy: 0.3,
            wz: 0.0,
        })
        .collect();
    let (wx, wy, _) = average_gyro(&gyro, 0.0, dt)?;

    // Forward motion of -8 px plus the rotation-induced shift.
    let induced = cam.focal_px * (wy * dt).tan();
    let measured = (-8.0 + induced, 0.0);
    let (tx, ty) = compensate_rotation(measured, (wx, wy), dt, &cam)?;
    println!("induced shift {induced:.3} px");
    println!("measured ({:.3}, {:.3}) -> compensated ({tx:.3}, {ty:.3})", measured.0, measured.1);
    Ok(())
}
