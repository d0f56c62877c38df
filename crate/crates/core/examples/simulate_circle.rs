//! Write a short synthetic circle flight to disk: PGM frames, ground truth,
//! gyro and range logs.
//!
//!     cargo run --release --example simulate_circle -- out_dir

use egoflow::{simulate_sequence, SimConfig};

fn main() -> egoflow::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "sim_circle".into());
    let cfg = SimConfig::from_kv_str(
        "trajectory = circle
         radius = 1
         period = 12.566
         duration = 1
         gyro_noise_std = 0.005
         range_noise_std = 0.005
         noise_seed = 1",
    )?;
    let sim = simulate_sequence(&cfg)?;
    sim.write_to_dir(&dir)?;
    println!("{} frames, {} gyro samples -> {dir}/", sim.frames.len(), sim.gyro.len());
    print!("config used:\n{}", cfg.to_kv_string());
    Ok(())
}
