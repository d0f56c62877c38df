//! Simulator configuration and its flat `key = value` text form.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use super::trajectory::{TrajectoryKind, TrajectorySpec, YawMode};
use crate::error::{Error, Result};
use crate::flow_core::CameraIntrinsics;

/// A rectangular pitch-rate pulse added to the gyro `wy` channel, with the
/// matching image shift rendered into the frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationPulse {
    pub wy: f64,
    pub start: f64,
    pub duration: f64,
}

impl RotationPulse {
    pub fn rate_at(&self, t: f64) -> f64 {
        const EPS: f64 = 1e-9;
        if t >= self.start - EPS && t < self.start + self.duration - EPS {
            self.wy
        } else {
            0.0
        }
    }

    /// Pitch angle accumulated over `[t0, t1]`.
    pub fn angle_between(&self, t0: f64, t1: f64) -> f64 {
        let lo = t0.max(self.start);
        let hi = t1.min(self.start + self.duration);
        self.wy * (hi - lo).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub trajectory: TrajectorySpec,
    pub altitude: f64,
    pub cam: CameraIntrinsics,
    pub fps: f64,
    pub texture_seed: u64,
    /// Coarsest texture cell size in metres.
    pub texture_scale: f64,
    pub gyro_noise_std: f64,
    /// Constant offset on the yaw-rate channel.
    pub gyro_bias: f64,
    pub range_noise_std: f64,
    pub gyro_rate: f64,
    pub noise_seed: u64,
    pub injection: Option<RotationPulse>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            trajectory: TrajectorySpec {
                kind: TrajectoryKind::Circle {
                    radius: 1.0,
                    period: 4.0 * PI,
                },
                yaw_mode: YawMode::Tangent,
                duration: 10.0,
            },
            altitude: 1.0,
            cam: CameraIntrinsics {
                focal_px: 640.0,
                cx: 240.0,
                cy: 240.0,
                image_w: 480,
                image_h: 480,
            },
            fps: 30.0,
            texture_seed: 1,
            texture_scale: 0.05,
            gyro_noise_std: 0.0,
            gyro_bias: 0.0,
            range_noise_std: 0.0,
            gyro_rate: 300.0,
            noise_seed: 0,
            injection: None,
        }
    }
}

/// Every key accepted in a config file.
pub const CONFIG_KEYS: &[&str] = &[
    "trajectory",
    "radius",
    "period",
    "side",
    "speed",
    "line_vx",
    "line_vy",
    "yaw_mode",
    "duration",
    "altitude",
    "focal_px",
    "cx",
    "cy",
    "image_w",
    "image_h",
    "fps",
    "texture_seed",
    "texture_scale",
    "gyro_noise_std",
    "gyro_bias",
    "range_noise_std",
    "gyro_rate",
    "noise_seed",
    "inject_wy",
    "inject_start",
    "inject_duration",
];

/// Flat view used while parsing; every trajectory parameter has a slot so
/// keys can arrive in any order.
#[derive(Debug, Clone)]
struct Flat {
    trajectory: String,
    radius: f64,
    period: f64,
    side: f64,
    speed: f64,
    line_vx: f64,
    line_vy: f64,
    yaw_mode: String,
    duration: f64,
    altitude: f64,
    focal_px: f64,
    cx: Option<f64>,
    cy: Option<f64>,
    /// Set once `cx`/`cy` are given explicitly, so a later image size does
    /// not re-centre them.
    cx_explicit: bool,
    cy_explicit: bool,
    image_w: usize,
    image_h: usize,
    fps: f64,
    texture_seed: u64,
    texture_scale: f64,
    gyro_noise_std: f64,
    gyro_bias: f64,
    range_noise_std: f64,
    gyro_rate: f64,
    noise_seed: u64,
    inject_wy: f64,
    inject_start: f64,
    inject_duration: f64,
}

impl From<&SimConfig> for Flat {
    fn from(c: &SimConfig) -> Self {
        let mut f = Flat {
            trajectory: String::new(),
            radius: 1.0,
            period: 4.0 * PI,
            side: 2.0,
            speed: 0.5,
            line_vx: 0.5,
            line_vy: 0.0,
            yaw_mode: match c.trajectory.yaw_mode {
                YawMode::Fixed => "fixed".into(),
                YawMode::Tangent => "tangent".into(),
            },
            duration: c.trajectory.duration,
            altitude: c.altitude,
            focal_px: c.cam.focal_px,
            cx: Some(c.cam.cx),
            cy: Some(c.cam.cy),
            cx_explicit: false,
            cy_explicit: false,
            image_w: c.cam.image_w,
            image_h: c.cam.image_h,
            fps: c.fps,
            texture_seed: c.texture_seed,
            texture_scale: c.texture_scale,
            gyro_noise_std: c.gyro_noise_std,
            gyro_bias: c.gyro_bias,
            range_noise_std: c.range_noise_std,
            gyro_rate: c.gyro_rate,
            noise_seed: c.noise_seed,
            inject_wy: 0.0,
            inject_start: 0.0,
            inject_duration: 0.0,
        };
        match c.trajectory.kind {
            TrajectoryKind::Circle { radius, period } => {
                f.trajectory = "circle".into();
                f.radius = radius;
                f.period = period;
            }
            TrajectoryKind::Square { side, speed } => {
                f.trajectory = "square".into();
                f.side = side;
                f.speed = speed;
            }
            TrajectoryKind::Line { vx, vy } => {
                f.trajectory = "line".into();
                f.line_vx = vx;
                f.line_vy = vy;
            }
        }
        if let Some(p) = c.injection {
            f.inject_wy = p.wy;
            f.inject_start = p.start;
            f.inject_duration = p.duration;
        }
        f
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

impl Flat {
    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "trajectory" => self.trajectory = value.to_owned(),
            "radius" => self.radius = parse(key, value)?,
            "period" => self.period = parse(key, value)?,
            "side" => self.side = parse(key, value)?,
            "speed" => self.speed = parse(key, value)?,
            "line_vx" => self.line_vx = parse(key, value)?,
            "line_vy" => self.line_vy = parse(key, value)?,
            "yaw_mode" => self.yaw_mode = value.to_owned(),
            "duration" => self.duration = parse(key, value)?,
            "altitude" => self.altitude = parse(key, value)?,
            "focal_px" => self.focal_px = parse(key, value)?,
            "cx" => {
                self.cx = Some(parse(key, value)?);
                self.cx_explicit = true;
            }
            "cy" => {
                self.cy = Some(parse(key, value)?);
                self.cy_explicit = true;
            }
            "image_w" => {
                self.image_w = parse(key, value)?;
                if !self.cx_explicit {
                    self.cx = None;
                }
            }
            "image_h" => {
                self.image_h = parse(key, value)?;
                if !self.cy_explicit {
                    self.cy = None;
                }
            }
            "fps" => self.fps = parse(key, value)?,
            "texture_seed" => self.texture_seed = parse(key, value)?,
            "texture_scale" => self.texture_scale = parse(key, value)?,
            "gyro_noise_std" => self.gyro_noise_std = parse(key, value)?,
            "gyro_bias" => self.gyro_bias = parse(key, value)?,
            "range_noise_std" => self.range_noise_std = parse(key, value)?,
            "gyro_rate" => self.gyro_rate = parse(key, value)?,
            "noise_seed" => self.noise_seed = parse(key, value)?,
            "inject_wy" => self.inject_wy = parse(key, value)?,
            "inject_start" => self.inject_start = parse(key, value)?,
            "inject_duration" => self.inject_duration = parse(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    fn build(self) -> Result<SimConfig> {
        let bad = |msg: String| Error::Config { line: 0, msg };
        let kind = match self.trajectory.as_str() {
            "circle" => TrajectoryKind::Circle {
                radius: self.radius,
                period: self.period,
            },
            "square" => TrajectoryKind::Square {
                side: self.side,
                speed: self.speed,
            },
            "line" => TrajectoryKind::Line {
                vx: self.line_vx,
                vy: self.line_vy,
            },
            other => return Err(bad(format!("unknown trajectory `{other}`"))),
        };
        let yaw_mode = match self.yaw_mode.as_str() {
            "fixed" => YawMode::Fixed,
            "tangent" => YawMode::Tangent,
            other => return Err(bad(format!("unknown yaw_mode `{other}`"))),
        };
        let cam = CameraIntrinsics {
            focal_px: self.focal_px,
            cx: self.cx.unwrap_or(self.image_w as f64 / 2.0),
            cy: self.cy.unwrap_or(self.image_h as f64 / 2.0),
            image_w: self.image_w,
            image_h: self.image_h,
        };
        let injection = (self.inject_duration > 0.0 && self.inject_wy != 0.0).then_some(RotationPulse {
            wy: self.inject_wy,
            start: self.inject_start,
            duration: self.inject_duration,
        });
        let cfg = SimConfig {
            trajectory: TrajectorySpec {
                kind,
                yaw_mode,
                duration: self.duration,
            },
            altitude: self.altitude,
            cam,
            fps: self.fps,
            texture_seed: self.texture_seed,
            texture_scale: self.texture_scale,
            gyro_noise_std: self.gyro_noise_std,
            gyro_bias: self.gyro_bias,
            range_noise_std: self.range_noise_std,
            gyro_rate: self.gyro_rate,
            noise_seed: self.noise_seed,
            injection,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.trajectory.validate()?;
        self.cam.validate()?;
        let positive = [
            ("altitude", self.altitude),
            ("fps", self.fps),
            ("texture_scale", self.texture_scale),
            ("gyro_rate", self.gyro_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("gyro_noise_std", self.gyro_noise_std),
            ("range_noise_std", self.range_noise_std),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !self.gyro_bias.is_finite() {
            return Err(Error::domain("gyro_bias must be finite"));
        }
        Ok(())
    }

    /// Parses a config file on top of the defaults. Blank lines and lines
    /// starting with `#` are skipped; unknown keys are errors.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        Self::default().with_overrides_text(text)
    }

    /// Applies `key = value` lines on top of this config.
    pub fn with_overrides_text(&self, text: &str) -> Result<Self> {
        let mut flat = Flat::from(self);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: i + 1,
                    msg: format!("expected `key = value`, got `{line}`"),
                });
            };
            flat.set(k.trim(), v.trim())
                .map_err(|msg| Error::Config { line: i + 1, msg })?;
        }
        flat.build()
    }

    /// Applies `(key, value)` overrides, e.g. from the command line.
    pub fn with_overrides<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut flat = Flat::from(self);
        for (k, v) in pairs {
            flat.set(k.trim(), v.trim())
                .map_err(|msg| Error::Config { line: 0, msg })?;
        }
        flat.build()
    }

    pub fn to_kv_string(&self) -> String {
        let f = Flat::from(self);
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("trajectory", f.trajectory.clone());
        match self.trajectory.kind {
            TrajectoryKind::Circle { .. } => {
                put("radius", f.radius.to_string());
                put("period", f.period.to_string());
            }
            TrajectoryKind::Square { .. } => {
                put("side", f.side.to_string());
                put("speed", f.speed.to_string());
            }
            TrajectoryKind::Line { .. } => {
                put("line_vx", f.line_vx.to_string());
                put("line_vy", f.line_vy.to_string());
            }
        }
        put("yaw_mode", f.yaw_mode.clone());
        put("duration", f.duration.to_string());
        put("altitude", f.altitude.to_string());
        put("focal_px", f.focal_px.to_string());
        put("cx", self.cam.cx.to_string());
        put("cy", self.cam.cy.to_string());
        put("image_w", f.image_w.to_string());
        put("image_h", f.image_h.to_string());
        put("fps", f.fps.to_string());
        put("texture_seed", f.texture_seed.to_string());
        put("texture_scale", f.texture_scale.to_string());
        put("gyro_noise_std", f.gyro_noise_std.to_string());
        put("gyro_bias", f.gyro_bias.to_string());
        put("range_noise_std", f.range_noise_std.to_string());
        put("gyro_rate", f.gyro_rate.to_string());
        put("noise_seed", f.noise_seed.to_string());
        if self.injection.is_some() {
            put("inject_wy", f.inject_wy.to_string());
            put("inject_start", f.inject_start.to_string());
            put("inject_duration", f.inject_duration.to_string());
        }
        s
    }
}
