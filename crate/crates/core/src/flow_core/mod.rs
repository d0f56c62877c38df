//! Domain types shared by every stage, the motion-vector stream codec and
//! CSV readers/writers for sensor logs and estimator output.

mod codec;
mod logs;

use std::f64::consts::PI;

pub use codec::{decode_mv_stream, encode_mv_stream, DecodedStream, MAGIC, RECORD_BYTES};
pub use logs::{
    read_gyro_csv, read_pose_csv, read_range_csv, read_velocity_csv, write_gyro_csv,
    write_pose_csv, write_range_csv, write_velocity_csv,
};

use crate::error::{Error, Result};

/// Normalizes an angle to `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    // rem_euclid can land exactly on -pi after the subtraction only through
    // rounding; fold it onto +pi.
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Per-macroblock displacement between two frames, in whole pixels, plus the
/// block dissimilarity of the winning candidate.
///
/// Fields are wider than the 8/16-bit wire layout so that out-of-range values
/// can be detected at encode time instead of silently wrapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MotionVector {
    pub du: i32,
    pub dv: i32,
    pub sad: u32,
}

impl MotionVector {
    /// SAD value marking a block the matcher refused to match (textureless).
    /// A 16x16 block of 8-bit pixels peaks at 65280, so it never collides
    /// with a genuine score at the default block size.
    pub const REJECTED_SAD: u32 = u16::MAX as u32;

    pub const fn new(du: i32, dv: i32, sad: u32) -> Self {
        MotionVector { du, dv, sad }
    }

    pub fn is_rejected(&self) -> bool {
        self.sad == Self::REJECTED_SAD
    }

    pub fn fits_wire_format(&self) -> bool {
        i8::try_from(self.du).is_ok() && i8::try_from(self.dv).is_ok() && self.sad <= 0xFFFF
    }
}

/// One frame's worth of motion vectors on the macroblock grid.
///
/// Vector `k` belongs to column `k % grid_w`, row `k / grid_w`, and describes
/// the motion from the previous frame of the stream to this one.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub frame_index: u32,
    pub timestamp: f64,
    pub grid_w: usize,
    pub grid_h: usize,
    pub macroblock_size: usize,
    pub vectors: Vec<MotionVector>,
}

impl FlowField {
    pub fn new(
        frame_index: u32,
        timestamp: f64,
        grid_w: usize,
        grid_h: usize,
        macroblock_size: usize,
        vectors: Vec<MotionVector>,
    ) -> Result<Self> {
        if vectors.len() != grid_w * grid_h {
            return Err(Error::format(
                None,
                format!(
                    "{} vectors for a {grid_w}x{grid_h} grid",
                    vectors.len()
                ),
            ));
        }
        if macroblock_size == 0 {
            return Err(Error::format(None, "macroblock size must be positive"));
        }
        Ok(FlowField {
            frame_index,
            timestamp,
            grid_w,
            grid_h,
            macroblock_size,
            vectors,
        })
    }

    /// A field with every vector zero, used as the placeholder for the first
    /// frame of a stream (there is no predecessor to match against).
    pub fn zeros(
        frame_index: u32,
        timestamp: f64,
        grid_w: usize,
        grid_h: usize,
        macroblock_size: usize,
    ) -> Self {
        FlowField {
            frame_index,
            timestamp,
            grid_w,
            grid_h,
            macroblock_size,
            vectors: vec![MotionVector::default(); grid_w * grid_h],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> MotionVector {
        self.vectors[row * self.grid_w + col]
    }

    /// Geometric centre of the macroblock at (`col`, `row`) in pixel-index
    /// coordinates.
    pub fn block_center(&self, col: usize, row: usize) -> (f64, f64) {
        let half = (self.macroblock_size as f64 - 1.0) / 2.0;
        (
            (col * self.macroblock_size) as f64 + half,
            (row * self.macroblock_size) as f64 + half,
        )
    }

    pub fn valid_count(&self) -> usize {
        self.vectors.iter().filter(|mv| !mv.is_rejected()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    /// Focal length divided by pixel pitch, in pixels.
    pub focal_px: f64,
    pub cx: f64,
    pub cy: f64,
    pub image_w: usize,
    pub image_h: usize,
}

impl CameraIntrinsics {
    pub fn new(focal_px: f64, cx: f64, cy: f64, image_w: usize, image_h: usize) -> Result<Self> {
        let cam = CameraIntrinsics {
            focal_px,
            cx,
            cy,
            image_w,
            image_h,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Principal point at `(w/2, h/2)`.
    pub fn centered(focal_px: f64, image_w: usize, image_h: usize) -> Result<Self> {
        Self::new(
            focal_px,
            image_w as f64 / 2.0,
            image_h as f64 / 2.0,
            image_w,
            image_h,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal_px.is_finite() && self.focal_px > 0.0) {
            return Err(Error::domain(format!("focal_px must be > 0, got {}", self.focal_px)));
        }
        if self.image_w == 0 || self.image_h == 0 {
            return Err(Error::domain("image dimensions must be positive"));
        }
        if !(0.0..self.image_w as f64).contains(&self.cx)
            || !(0.0..self.image_h as f64).contains(&self.cy)
        {
            return Err(Error::domain(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.image_w, self.image_h
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GyroSample {
    pub timestamp: f64,
    pub wx: f64,
    pub wy: f64,
    pub wz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RangeSample {
    pub timestamp: f64,
    pub z: f64,
}

impl RangeSample {
    /// Ultrasonic sensors report dropouts as zero or garbage; those samples
    /// stay in the log but are never used as a ground distance.
    pub fn is_usable(&self) -> bool {
        self.z.is_finite() && self.z > 0.0 && self.timestamp.is_finite()
    }
}

/// Rotation about the optical axis followed by an image-plane translation:
/// `dst = R(theta) * src + (tx, ty)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RigidTransform2D {
    pub theta: f64,
    pub tx: f64,
    pub ty: f64,
}

impl RigidTransform2D {
    pub fn new(theta: f64, tx: f64, ty: f64) -> Self {
        RigidTransform2D {
            theta: normalize_angle(theta),
            tx,
            ty,
        }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (c * x - s * y + self.tx, s * x + c * y + self.ty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimateStatus {
    #[default]
    Valid,
    /// Produced with a reused (stale) ground distance.
    Degraded,
    /// No usable motion for this interval; velocities are carried forward
    /// from the last valid estimate and the pose is not advanced.
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityEstimate {
    /// Midpoint of the frame interval the estimate covers.
    pub timestamp: f64,
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
    pub z_used: f64,
    pub inlier_count: usize,
    pub valid_count: usize,
    pub status: EstimateStatus,
}

impl VelocityEstimate {
    pub fn is_valid(&self) -> bool {
        self.status != EstimateStatus::Invalid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose2D {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }
}

/// A pose tagged with the time it refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPose {
    pub timestamp: f64,
    pub pose: Pose2D,
}
