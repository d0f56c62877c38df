//! Simulate a circular flight, estimate velocity and pose from the rendered
//! frames, and score the result against ground truth.
//!
//!     cargo run --release --example end_to_end -- [seconds]

use std::time::Instant;

use egoflow::pipeline_eval::evaluate;
use egoflow::{compute_flow_field, run_pipeline, simulate_sequence, FlowField, MatchParams, PipelineConfig, SimConfig};

fn main() -> egoflow::Result<()> {
    let seconds: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4.0);
    let cfg = SimConfig::default().with_overrides([
        ("duration", seconds.to_string().as_str()),
        ("gyro_noise_std", "0.005"),
        ("range_noise_std", "0.005"),
        ("noise_seed", "7"),
    ])?;

    let t = Instant::now();
    let sim = simulate_sequence(&cfg)?;
    println!("rendered {} frames in {:.1?}", sim.frames.len(), t.elapsed());

    let t = Instant::now();
    let params = MatchParams::default();
    let times = sim.frame_times();
    let mut fields = vec![FlowField::zeros(0, times[0], 30, 30, 16)];
    for k in 1..sim.frames.len() {
        fields.push(compute_flow_field(&sim.frames[k - 1], &sim.frames[k], times[k], k as u32, &params)?);
    }
    println!("block matching took {:.1?}", t.elapsed());

    let out = run_pipeline(&fields, &sim.gyro, &sim.range, &PipelineConfig::new(cfg.cam))?;
    let report = evaluate(&out.velocities, Some(&out.poses), &sim.truth, true)?;
    print!("{}", report.to_text());
    Ok(())
}
