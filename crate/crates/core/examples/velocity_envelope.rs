//! Detectable speed range against ground distance for a few frame rates.

use egoflow::{velocity_envelope, CameraIntrinsics, MatchParams};

fn main() -> egoflow::Result<()> {
    let cam = CameraIntrinsics::centered(640.0, 480, 480)?;
    let params = MatchParams::default();
    println!("{:>5} {:>18} {:>18}", "z [m]", "30 fps [m/s]", "90 fps [m/s]");
    for z in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let (lo30, hi30) = velocity_envelope(&cam, z, 30.0, &params)?;
        let (lo90, hi90) = velocity_envelope(&cam, z, 90.0, &params)?;
        println!("{z:>5} {lo30:>8.4} .. {hi30:<6.2} {lo90:>8.4} .. {hi90:<6.2}");
    }
    Ok(())
}
