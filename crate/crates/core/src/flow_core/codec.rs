//! Binary motion-vector stream.
//!
//! ```text
//! "MVS1"
//! per frame (little-endian, no padding):
//!   u32 frame_index | f64 timestamp | u16 grid_w | u16 grid_h
//!   u16 macroblock_size | u16 reserved (0)
//!   grid_w * grid_h records of { i8 du, i8 dv, u16 sad }
//! ```

use super::{FlowField, MotionVector};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MVS1";
pub const RECORD_BYTES: usize = 4;
const FRAME_HEADER_BYTES: usize = 4 + 8 + 2 + 2 + 2 + 2;

/// Result of decoding a possibly truncated stream.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedStream {
    pub fields: Vec<FlowField>,
    /// Set when the input ended partway through a frame; `fields` then holds
    /// every complete frame before the cut.
    pub truncated: bool,
    /// Bytes covered by the magic plus the complete frames.
    pub bytes_consumed: usize,
}

pub fn encode_mv_stream(fields: &[FlowField]) -> Result<Vec<u8>> {
    let payload: usize = fields
        .iter()
        .map(|f| FRAME_HEADER_BYTES + RECORD_BYTES * f.vectors.len())
        .sum();
    let mut out = Vec::with_capacity(MAGIC.len() + payload);
    out.extend_from_slice(MAGIC);

    let Some(first) = fields.first() else {
        return Ok(out);
    };
    let dims = (first.grid_w, first.grid_h, first.macroblock_size);
    let grid_w = u16::try_from(dims.0).map_err(|_| Error::Range(format!("grid_w {} exceeds u16", dims.0)))?;
    let grid_h = u16::try_from(dims.1).map_err(|_| Error::Range(format!("grid_h {} exceeds u16", dims.1)))?;
    let mb = u16::try_from(dims.2)
        .map_err(|_| Error::Range(format!("macroblock_size {} exceeds u16", dims.2)))?;

    let mut prev_ts = f64::NEG_INFINITY;
    for (i, f) in fields.iter().enumerate() {
        if (f.grid_w, f.grid_h, f.macroblock_size) != dims {
            return Err(Error::format(
                None,
                format!(
                    "frame {i}: grid {}x{} mb {} differs from stream grid {}x{} mb {}",
                    f.grid_w, f.grid_h, f.macroblock_size, dims.0, dims.1, dims.2
                ),
            ));
        }
        if f.vectors.len() != f.grid_w * f.grid_h {
            return Err(Error::format(
                None,
                format!("frame {i}: {} vectors for {}x{} grid", f.vectors.len(), f.grid_w, f.grid_h),
            ));
        }
        // also rejects NaN
        if !(f.timestamp > prev_ts) {
            return Err(Error::format(
                None,
                format!("frame {i}: timestamp {} not after {}", f.timestamp, prev_ts),
            ));
        }
        prev_ts = f.timestamp;

        out.extend_from_slice(&f.frame_index.to_le_bytes());
        out.extend_from_slice(&f.timestamp.to_le_bytes());
        out.extend_from_slice(&grid_w.to_le_bytes());
        out.extend_from_slice(&grid_h.to_le_bytes());
        out.extend_from_slice(&mb.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        for (k, mv) in f.vectors.iter().enumerate() {
            let (Ok(du), Ok(dv), Ok(sad)) = (
                i8::try_from(mv.du),
                i8::try_from(mv.dv),
                u16::try_from(mv.sad),
            ) else {
                return Err(Error::Range(format!(
                    "frame {i} block {k}: ({}, {}, sad {}) does not fit i8/i8/u16",
                    mv.du, mv.dv, mv.sad
                )));
            };
            out.push(du as u8);
            out.push(dv as u8);
            out.extend_from_slice(&sad.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_mv_stream(bytes: &[u8]) -> Result<DecodedStream> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::format(0, "bad magic, expected \"MVS1\""));
    }
    let mut pos = MAGIC.len();
    let mut fields = Vec::new();
    let mut truncated = false;

    while pos < bytes.len() {
        let Some(header) = bytes.get(pos..pos + FRAME_HEADER_BYTES) else {
            truncated = true;
            break;
        };
        let frame_index = u32::from_le_bytes(header[0..4].try_into().unwrap());
        let timestamp = f64::from_le_bytes(header[4..12].try_into().unwrap());
        let grid_w = u16::from_le_bytes(header[12..14].try_into().unwrap()) as usize;
        let grid_h = u16::from_le_bytes(header[14..16].try_into().unwrap()) as usize;
        let mb = u16::from_le_bytes(header[16..18].try_into().unwrap()) as usize;
        let reserved = u16::from_le_bytes(header[18..20].try_into().unwrap());
        if reserved != 0 {
            return Err(Error::format(pos as u64 + 18, format!("reserved field is {reserved}, expected 0")));
        }
        if mb == 0 {
            return Err(Error::format(pos as u64 + 16, "macroblock size 0"));
        }

        let n = grid_w * grid_h;
        let body_start = pos + FRAME_HEADER_BYTES;
        let Some(body) = bytes.get(body_start..body_start + n * RECORD_BYTES) else {
            truncated = true;
            break;
        };
        let vectors = body
            .chunks_exact(RECORD_BYTES)
            .map(|r| MotionVector {
                du: r[0] as i8 as i32,
                dv: r[1] as i8 as i32,
                sad: u16::from_le_bytes([r[2], r[3]]) as u32,
            })
            .collect();
        fields.push(FlowField {
            frame_index,
            timestamp,
            grid_w,
            grid_h,
            macroblock_size: mb,
            vectors,
        });
        pos = body_start + n * RECORD_BYTES;
    }

    Ok(DecodedStream {
        fields,
        truncated,
        bytes_consumed: pos,
    })
}
