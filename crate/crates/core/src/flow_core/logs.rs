//! CSV sensor logs and estimator output.
//!
//! Velocity rows carry no explicit status column; an invalid estimate is
//! written with `z_used = 0`, which a valid estimate can never have.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{EstimateStatus, GyroSample, Pose2D, RangeSample, TimedPose, VelocityEstimate};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct VelocityRow {
    timestamp: f64,
    vx: f64,
    vy: f64,
    wz: f64,
    z_used: f64,
    inlier_count: usize,
    valid_count: usize,
}

#[derive(Serialize, Deserialize)]
struct PoseRow {
    timestamp: f64,
    x: f64,
    y: f64,
    heading: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(rdr: impl Read, header: &[&str]) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::format(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize().enumerate() {
        out.push(row.map_err(|e: csv::Error| Error::format(i as u64 + 2, e.to_string()))?);
    }
    Ok(out)
}

fn write_rows<T: Serialize>(w: impl Write, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_gyro_csv(r: impl Read) -> Result<Vec<GyroSample>> {
    let rows: Vec<GyroSample> = read_rows(r, &["timestamp", "wx", "wy", "wz"])?;
    for (i, pair) in rows.windows(2).enumerate() {
        if pair[1].timestamp < pair[0].timestamp {
            return Err(Error::format(i as u64 + 3, "gyro timestamps must be non-decreasing"));
        }
    }
    Ok(rows)
}

pub fn write_gyro_csv(w: impl Write, samples: &[GyroSample]) -> Result<()> {
    write_rows(w, samples)
}

pub fn read_range_csv(r: impl Read) -> Result<Vec<RangeSample>> {
    read_rows(r, &["timestamp", "z"])
}

pub fn write_range_csv(w: impl Write, samples: &[RangeSample]) -> Result<()> {
    write_rows(w, samples)
}

pub fn read_velocity_csv(r: impl Read) -> Result<Vec<VelocityEstimate>> {
    let rows: Vec<VelocityRow> = read_rows(
        r,
        &["timestamp", "vx", "vy", "wz", "z_used", "inlier_count", "valid_count"],
    )?;
    Ok(rows
        .into_iter()
        .map(|r| VelocityEstimate {
            timestamp: r.timestamp,
            vx: r.vx,
            vy: r.vy,
            wz: r.wz,
            z_used: r.z_used,
            inlier_count: r.inlier_count,
            valid_count: r.valid_count,
            status: if r.z_used > 0.0 {
                EstimateStatus::Valid
            } else {
                EstimateStatus::Invalid
            },
        })
        .collect())
}

pub fn write_velocity_csv(w: impl Write, est: &[VelocityEstimate]) -> Result<()> {
    write_rows(
        w,
        est.iter().map(|e| VelocityRow {
            timestamp: e.timestamp,
            vx: e.vx,
            vy: e.vy,
            wz: e.wz,
            z_used: if e.is_valid() { e.z_used } else { 0.0 },
            inlier_count: e.inlier_count,
            valid_count: e.valid_count,
        }),
    )
}

pub fn read_pose_csv(r: impl Read) -> Result<Vec<TimedPose>> {
    let rows: Vec<PoseRow> = read_rows(r, &["timestamp", "x", "y", "heading"])?;
    Ok(rows
        .into_iter()
        .map(|r| TimedPose {
            timestamp: r.timestamp,
            pose: Pose2D {
                x: r.x,
                y: r.y,
                heading: r.heading,
            },
        })
        .collect())
}

pub fn write_pose_csv(w: impl Write, poses: &[TimedPose]) -> Result<()> {
    write_rows(
        w,
        poses.iter().map(|p| PoseRow {
            timestamp: p.timestamp,
            x: p.pose.x,
            y: p.pose.y,
            heading: p.pose.heading,
        }),
    )
}
