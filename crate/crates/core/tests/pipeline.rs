use std::f64::consts::PI;

use egoflow::pipeline_eval::{align_trajectories, evaluate, TimedPoint};
use egoflow::simulator::{TrajectoryKind, TrajectorySpec, YawMode};
use egoflow::{
    compute_flow_field, run_pipeline, simulate_sequence, CameraIntrinsics, EstimateStatus, FlowField, GyroSample,
    MatchParams, MotionVector, Pose2D, PipelineConfig, RangeSample, SimConfig, SimOutput, TimedPose,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn fields_for(sim: &SimOutput) -> Vec<FlowField> {
    let t = sim.frame_times();
    let p = MatchParams::default();
    let (w, h) = (sim.frames[0].width / 16, sim.frames[0].height / 16);
    let mut fields = vec![FlowField::zeros(0, t[0], w, h, 16)];
    for k in 1..sim.frames.len() {
        fields.push(compute_flow_field(&sim.frames[k - 1], &sim.frames[k], t[k], k as u32, &p).unwrap());
    }
    fields
}

fn line_sim(vx: f64, vy: f64, noise: bool) -> (SimConfig, SimOutput) {
    let cfg = SimConfig {
        trajectory: TrajectorySpec {
            kind: TrajectoryKind::Line { vx, vy },
            yaw_mode: YawMode::Fixed,
            duration: 1.0,
        },
        cam: CameraIntrinsics::centered(640.0, 192, 192).unwrap(),
        gyro_noise_std: if noise { 0.005 } else { 0.0 },
        range_noise_std: if noise { 0.005 } else { 0.0 },
        noise_seed: 21,
        ..SimConfig::default()
    };
    let sim = simulate_sequence(&cfg).unwrap();
    (cfg, sim)
}

fn random_field(rng: &mut ChaCha8Rng, i: u32, t: f64, grid: usize) -> FlowField {
    let v = (0..grid * grid)
        .map(|_| MotionVector::new(rng.random_range(-64..=64), rng.random_range(-64..=64), 0))
        .collect();
    FlowField::new(i, t, grid, grid, 16, v).unwrap()
}

fn flat_logs(n: usize, dt: f64) -> (Vec<GyroSample>, Vec<RangeSample>) {
    let gyro = (0..=n * 10)
        .map(|j| GyroSample { timestamp: j as f64 * dt / 10.0, wx: 0.0, wy: 0.0, wz: 0.0 })
        .collect();
    let range = (0..n).map(|k| RangeSample { timestamp: k as f64 * dt, z: 1.0 }).collect();
    (gyro, range)
}

#[test]
fn sign_convention_and_line_accuracy() {
    // Camera moving +x: image content moves -u, estimated vx is positive.
    let (cfg, sim) = line_sim(0.375, 0.0, false);
    let fields = fields_for(&sim);
    let du: Vec<i32> = fields[1].vectors.iter().map(|v| v.du).collect();
    assert!(du.iter().filter(|&&d| d == -8).count() > du.len() / 2);

    let out = run_pipeline(&fields, &sim.gyro, &sim.range, &PipelineConfig::new(cfg.cam)).unwrap();
    for v in &out.velocities {
        assert_eq!(v.status, EstimateStatus::Valid);
        assert!((v.vx - 0.375).abs() < 0.01 && v.vy.abs() < 0.01 && v.wz.abs() < 0.01, "{v:?}");
    }
    let last = out.poses.last().unwrap();
    let truth = sim.truth.last().unwrap();
    assert!((last.pose.x - truth.pose.x).abs() < 0.01 && last.pose.y.abs() < 0.01);
    assert_eq!(last.timestamp, truth.timestamp);
}

#[test]
fn deterministic() {
    let (cfg, sim) = line_sim(0.2, -0.3, true);
    let fields = fields_for(&sim);
    let pc = PipelineConfig::new(cfg.cam);
    let a = run_pipeline(&fields, &sim.gyro, &sim.range, &pc).unwrap();
    let b = run_pipeline(&fields, &sim.gyro, &sim.range, &pc).unwrap();
    let bits = |o: &egoflow::PipelineOutput| -> Vec<u64> {
        o.velocities
            .iter()
            .flat_map(|v| [v.vx, v.vy, v.wz, v.z_used])
            .chain(o.poses.iter().flat_map(|p| [p.pose.x, p.pose.y, p.pose.heading]))
            .map(f64::to_bits)
            .collect()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn compensation_is_noop_at_zero_rates() {
    let (cfg, sim) = line_sim(0.3, 0.1, false);
    let fields = fields_for(&sim);
    let on = run_pipeline(&fields, &sim.gyro, &sim.range, &PipelineConfig::new(cfg.cam)).unwrap();
    let off_cfg = PipelineConfig {
        compensation_enabled: false,
        ..PipelineConfig::new(cfg.cam)
    };
    let off = run_pipeline(&fields, &sim.gyro, &sim.range, &off_cfg).unwrap();
    assert_eq!(on, off);
}

#[test]
fn all_outlier_stream_is_invalid() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dt = 1.0 / 30.0;
    let fields: Vec<_> = (0..20).map(|i| random_field(&mut rng, i, i as f64 * dt, 10)).collect();
    let (gyro, range) = flat_logs(20, dt);
    let cam = CameraIntrinsics::centered(640.0, 160, 160).unwrap();
    let out = run_pipeline(&fields, &gyro, &range, &PipelineConfig::new(cam)).unwrap();
    assert!(out.velocities.iter().all(|v| v.status == EstimateStatus::Invalid));
    assert!(out.poses.iter().all(|p| p.pose == Pose2D::default()));
}

#[test]
fn invalid_gaps_hold_pose_and_carry_velocity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dt = 0.1;
    let fields: Vec<_> = (0..12)
        .map(|i| {
            if (4..8).contains(&i) {
                random_field(&mut rng, i, i as f64 * dt, 10)
            } else {
                FlowField::new(i, i as f64 * dt, 10, 10, 16, vec![MotionVector::new(-16, 0, 0); 100]).unwrap()
            }
        })
        .collect();
    let (gyro, range) = flat_logs(12, dt);
    let cam = CameraIntrinsics::centered(640.0, 160, 160).unwrap();
    let out = run_pipeline(&fields, &gyro, &range, &PipelineConfig::new(cam)).unwrap();
    for i in 4..8 {
        let v = out.velocities[i - 1];
        assert_eq!(v.status, EstimateStatus::Invalid);
        assert_eq!(v.vx, out.velocities[2].vx, "last valid velocity carried");
        assert_eq!(out.poses[i].pose, out.poses[3].pose);
    }
    // 7 valid intervals of 16 px at z = 1, f = 640, dt = 0.1: 0.025 m each
    assert!((out.poses[11].pose.x - 7.0 * 0.025).abs() < 1e-9);
}

fn wiggly_path(n: usize) -> Vec<TimedPose> {
    (0..n)
        .map(|k| {
            let t = k as f64 * 0.1;
            TimedPose {
                timestamp: t,
                pose: Pose2D::new(t + 0.3 * (2.0 * t).sin(), 0.5 * t * t / 10.0, 0.1 * t),
            }
        })
        .collect()
}

fn rotate_about(p: &[TimedPose], angle: f64, (ox, oy): (f64, f64), shift: (f64, f64)) -> Vec<TimedPoint> {
    let (s, c) = angle.sin_cos();
    p.iter()
        .map(|q| {
            let (x, y) = (q.pose.x - ox, q.pose.y - oy);
            TimedPoint {
                timestamp: q.timestamp,
                x: ox + c * x - s * y + shift.0,
                y: oy + s * x + c * y + shift.1,
            }
        })
        .collect()
}

#[test]
fn alignment_recovers_rotation() {
    let est = wiggly_path(100);
    let origin = (est[0].pose.x, est[0].pose.y);
    let reference = rotate_about(&est, 30f64.to_radians(), origin, (3.0, -2.0));
    let al = align_trajectories(&est, &reference, 0.01, true).unwrap();
    assert!((al.rotation - 30f64.to_radians()).abs() < 1e-9);
    assert!(al.rms_residual < 1e-9);

    let same = rotate_about(&est, 0.0, origin, (0.0, 0.0));
    let al = align_trajectories(&est, &same, 0.01, true).unwrap();
    assert!(al.rotation.abs() < 1e-12 && al.rms_residual < 1e-12);
    assert!(al.translation.0.abs() < 1e-12 && al.translation.1.abs() < 1e-12);
}

#[test]
fn alignment_residual_invariant_to_prerotation() {
    let est = wiggly_path(80);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let reference: Vec<TimedPoint> = rotate_about(&est, 0.4, (1.0, 1.0), (0.0, 0.0))
        .into_iter()
        .map(|p| TimedPoint { x: p.x + noise.sample(&mut rng), y: p.y + noise.sample(&mut rng), ..p })
        .collect();
    let base = align_trajectories(&est, &reference, 0.01, true).unwrap().rms_residual;
    for angle in [-2.5, -0.3, 1.0, PI] {
        let spun: Vec<TimedPose> = rotate_about(&est, angle, (-4.0, 2.0), (0.0, 0.0))
            .into_iter()
            .zip(&est)
            .map(|(p, q)| TimedPose { timestamp: p.timestamp, pose: Pose2D::new(p.x, p.y, q.pose.heading) })
            .collect();
        let r = align_trajectories(&spun, &reference, 0.01, true).unwrap().rms_residual;
        assert!((r - base).abs() < 1e-9, "{angle}: {r} vs {base}");
    }
}

#[test]
fn alignment_under_position_noise() {
    // The first sample anchors both series, so it is left noise-free; the
    // residual is then the 2D noise itself, RMS = sqrt(2) * sigma.
    let sigma = 0.1;
    let est = wiggly_path(100);
    let angle = 0.7;
    let mut rms = Vec::new();
    let mut rot_err: f64 = 0.0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let reference: Vec<TimedPoint> = rotate_about(&est, angle, (est[0].pose.x, est[0].pose.y), (0.0, 0.0))
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                if i == 0 {
                    p
                } else {
                    TimedPoint { x: p.x + noise.sample(&mut rng), y: p.y + noise.sample(&mut rng), ..p }
                }
            })
            .collect();
        let al = align_trajectories(&est, &reference, 0.01, true).unwrap();
        rms.push(al.rms_residual);
        rot_err = rot_err.max((al.rotation - angle).abs());
    }
    let mean = rms.iter().sum::<f64>() / rms.len() as f64;
    assert!((mean - 2f64.sqrt() * sigma).abs() < 0.1 * sigma, "{mean}");
    assert!(rot_err < 0.02, "{rot_err}");
}

#[test]
fn evaluate_end_to_end_line() {
    // (8, -4) px per frame, on the matcher's 2 px grid
    let (cfg, sim) = line_sim(0.375, 0.1875, true);
    let fields = fields_for(&sim);
    let out = run_pipeline(&fields, &sim.gyro, &sim.range, &PipelineConfig::new(cfg.cam)).unwrap();
    let r = evaluate(&out.velocities, Some(&out.poses), &sim.truth, true).unwrap();
    assert_eq!(r.n_valid, sim.frames.len() - 1);
    assert_eq!(r.n_invalid, 0);
    assert!(r.stats.mean < 0.05 && r.stats.std < 0.05, "{r:?}");
    assert!(r.final_position_error_m < 0.02);
}
