//! Synthetic downward-camera sequences over a procedural ground texture,
//! with analytic ground truth and noisy gyro/range logs.
//!
//! The vehicle flies level (no roll or pitch) at constant altitude. A camera
//! pixel `(u, v)` sees the ground point
//! `position + R(heading) * ((u - cx) / f * z, (v - cy) / f * z)`.

mod config;
mod texture;
mod trajectory;

use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{RotationPulse, SimConfig, CONFIG_KEYS};
pub use texture::{texture_sample, texture_value, CONTRAST, OCTAVES, PERSISTENCE};
pub use trajectory::{trajectory_state, GroundTruthSample, TrajectoryKind, TrajectorySpec, YawMode};

use crate::block_match::GrayImage;
use crate::error::{Error, Result};
use crate::flow_core::{write_gyro_csv, write_range_csv, GyroSample, Pose2D, RangeSample};
use crate::motion_model::rotation_shift_px;

/// Renders the ground as seen from `pose` at height `z`.
pub fn render_frame(pose: &Pose2D, z: f64, cfg: &SimConfig) -> GrayImage {
    render_shifted(pose, z, 0.0, cfg)
}

/// Like [`render_frame`], with the image content displaced by `shift_u`
/// pixels along +u, as a small pitch rotation would.
pub fn render_shifted(pose: &Pose2D, z: f64, shift_u: f64, cfg: &SimConfig) -> GrayImage {
    let cam = &cfg.cam;
    let (s, c) = pose.heading.sin_cos();
    let k = z / cam.focal_px;
    let mut pixels = Vec::with_capacity(cam.image_w * cam.image_h);
    for v in 0..cam.image_h {
        let b = (v as f64 - cam.cy) * k;
        for u in 0..cam.image_w {
            let a = (u as f64 - shift_u - cam.cx) * k;
            let gx = pose.x + c * a - s * b;
            let gy = pose.y + s * a + c * b;
            pixels.push(texture_sample(cfg.texture_seed, gx, gy, cfg.texture_scale));
        }
    }
    GrayImage {
        width: cam.image_w,
        height: cam.image_h,
        pixels,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub frames: Vec<GrayImage>,
    /// One row per frame, at the frame timestamps.
    pub truth: Vec<GroundTruthSample>,
    pub gyro: Vec<GyroSample>,
    /// One range reading per frame.
    pub range: Vec<RangeSample>,
}

impl SimOutput {
    pub fn frame_times(&self) -> Vec<f64> {
        self.truth.iter().map(|g| g.timestamp).collect()
    }

    /// Writes `frame_%06d.pgm`, `truth.csv`, `gyro.csv` and `range.csv`
    /// into `dir`, creating it if needed.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
        for (k, frame) in self.frames.iter().enumerate() {
            frame.write_pgm(dir.join(format!("frame_{k:06}.pgm")))?;
        }
        let create = |name: &str| {
            let p = dir.join(name);
            std::fs::File::create(&p)
                .map(std::io::BufWriter::new)
                .map_err(|e| Error::file(p, e))
        };
        write_truth_csv(create("truth.csv")?, &self.truth)?;
        write_gyro_csv(create("gyro.csv")?, &self.gyro)?;
        write_range_csv(create("range.csv")?, &self.range)?;
        Ok(())
    }
}

/// Number of frames in `duration` seconds at `fps`, the first at t = 0.
pub fn frame_count(duration: f64, fps: f64) -> usize {
    ((duration * fps) + 1e-9).floor() as usize
}

/// Cumulative image shift (pixels along +u) injected at each frame time.
fn injected_shifts(cfg: &SimConfig, times: &[f64]) -> Vec<f64> {
    let mut shifts = vec![0.0; times.len()];
    if let Some(pulse) = cfg.injection {
        for k in 1..times.len() {
            let angle = pulse.angle_between(times[k - 1], times[k]);
            shifts[k] = shifts[k - 1] + rotation_shift_px(angle, cfg.cam.focal_px);
        }
    }
    shifts
}

fn normal(std: f64) -> Option<Normal<f64>> {
    (std > 0.0).then(|| Normal::new(0.0, std).expect("validated std"))
}

/// Generates a full sequence. Frames are rendered in parallel; every random
/// draw comes from `noise_seed`, so identical configs give identical output.
pub fn simulate_sequence(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let spec = &cfg.trajectory;
    let n = frame_count(spec.duration, cfg.fps);
    let times: Vec<f64> = (0..n).map(|k| k as f64 / cfg.fps).collect();

    let corners = spec.corner_times();
    let frame_dt = 1.0 / cfg.fps;
    let truth = times
        .iter()
        .map(|&t| {
            let mut g = trajectory_state(spec, cfg.altitude, t)?;
            g.corner_flag |= corners.iter().any(|&c| (c - t).abs() <= frame_dt + 1e-9);
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;

    let shifts = injected_shifts(cfg, &times);
    let frames = truth
        .par_iter()
        .zip(&shifts)
        .map(|(g, &shift)| render_shifted(&g.pose, g.z, shift, cfg))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
    let gyro_noise = normal(cfg.gyro_noise_std);
    let mut draw = |d: &Option<Normal<f64>>| d.as_ref().map_or(0.0, |d| d.sample(&mut rng));
    let n_gyro = ((spec.duration * cfg.gyro_rate) + 1e-9).floor() as usize + 1;
    let mut gyro = Vec::with_capacity(n_gyro);
    for j in 0..n_gyro {
        let t = j as f64 / cfg.gyro_rate;
        let g = trajectory_state(spec, cfg.altitude, t)?;
        let pulse = cfg.injection.map_or(0.0, |p| p.rate_at(t));
        gyro.push(GyroSample {
            timestamp: t,
            wx: draw(&gyro_noise),
            wy: pulse + draw(&gyro_noise),
            wz: g.wz + cfg.gyro_bias + draw(&gyro_noise),
        });
    }

    let range_noise = normal(cfg.range_noise_std);
    let range = times
        .iter()
        .map(|&t| RangeSample {
            timestamp: t,
            z: (cfg.altitude + draw(&range_noise)).max(f64::MIN_POSITIVE),
        })
        .collect();

    Ok(SimOutput {
        frames,
        truth,
        gyro,
        range,
    })
}

#[derive(Serialize, Deserialize)]
struct TruthRow {
    timestamp: f64,
    x: f64,
    y: f64,
    heading: f64,
    vx: f64,
    vy: f64,
    wz: f64,
    z: f64,
    corner_flag: u8,
}

pub fn write_truth_csv(w: impl Write, truth: &[GroundTruthSample]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for g in truth {
        wtr.serialize(TruthRow {
            timestamp: g.timestamp,
            x: g.pose.x,
            y: g.pose.y,
            heading: g.pose.heading,
            vx: g.vx,
            vy: g.vy,
            wz: g.wz,
            z: g.z,
            corner_flag: g.corner_flag as u8,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_truth_csv(r: impl Read) -> Result<Vec<GroundTruthSample>> {
    const HEADER: [&str; 9] = ["timestamp", "x", "y", "heading", "vx", "vy", "wz", "z", "corner_flag"];
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    if rdr.headers()?.iter().ne(HEADER) {
        return Err(Error::format(1, format!("expected header `{}`", HEADER.join(","))));
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, row)| {
            let r: TruthRow = row.map_err(|e: csv::Error| Error::format(i as u64 + 2, e.to_string()))?;
            Ok(GroundTruthSample {
                timestamp: r.timestamp,
                pose: Pose2D {
                    x: r.x,
                    y: r.y,
                    heading: r.heading,
                },
                vx: r.vx,
                vy: r.vy,
                wz: r.wz,
                z: r.z,
                corner_flag: r.corner_flag != 0,
            })
        })
        .collect()
}
