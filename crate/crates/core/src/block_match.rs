//! Exhaustive SAD block matching on a fixed macroblock grid.
//!
//! Candidates are visited in tie-break order (smaller `du^2 + dv^2`, then
//! smaller `dv`, then smaller `du`), so a later candidate only wins with a
//! strictly smaller SAD. That ordering also lets the row loop bail out as soon
//! as the running sum reaches the best score so far without changing the
//! result.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow_core::{FlowField, MotionVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::domain(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                pixels.push(f(u, v));
            }
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u8 {
        self.pixels[v * self.width + u]
    }

    #[inline]
    fn row(&self, v: usize, u0: usize, len: usize) -> &[u8] {
        let start = v * self.width + u0;
        &self.pixels[start..start + len]
    }

    /// Reads an 8-bit binary PGM (P5, maxval 255).
    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
        Self::decode_pgm(&bytes)
    }

    pub fn decode_pgm(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Pnm)?;
        let image::DynamicImage::ImageLuma8(gray) = img else {
            return Err(Error::format(0, "expected an 8-bit grayscale PGM"));
        };
        let (w, h) = gray.dimensions();
        GrayImage::new(w as usize, h as usize, gray.into_raw())
    }

    pub fn encode_pgm(&self) -> Result<Vec<u8>> {
        use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
        use image::ImageEncoder;

        let mut out = Vec::with_capacity(self.pixels.len() + 32);
        PnmEncoder::new(&mut out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(
                &self.pixels,
                self.width as u32,
                self.height as u32,
                image::ExtendedColorType::L8,
            )?;
        Ok(out)
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.encode_pgm()?).map_err(|e| Error::file(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchParams {
    pub macroblock_size: usize,
    /// Largest displacement searched along each axis, in pixels.
    pub search_range: i32,
    /// Spacing of the candidate grid, in pixels.
    pub step: i32,
    /// When set, blocks whose summed absolute deviation from their own mean
    /// falls below this value are reported as rejected instead of matched.
    pub flat_sad_threshold: Option<u32>,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            macroblock_size: 16,
            search_range: 64,
            step: 2,
            flat_sad_threshold: None,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        if self.macroblock_size < 4 {
            return Err(Error::domain(format!(
                "macroblock_size must be >= 4, got {}",
                self.macroblock_size
            )));
        }
        if self.step < 1 {
            return Err(Error::domain(format!("step must be >= 1, got {}", self.step)));
        }
        if self.search_range < 0 || self.search_range % self.step != 0 {
            return Err(Error::domain(format!(
                "search_range {} must be a non-negative multiple of step {}",
                self.search_range, self.step
            )));
        }
        Ok(())
    }

    /// Every candidate displacement, in the order the matcher visits them.
    pub fn candidates(&self) -> Vec<(i32, i32)> {
        let r = self.search_range;
        let offsets: Vec<i32> = (-r..=r).step_by(self.step as usize).collect();
        let mut c: Vec<(i32, i32)> = offsets
            .iter()
            .flat_map(|&dv| offsets.iter().map(move |&du| (du, dv)))
            .collect();
        c.sort_by_key(|&(du, dv)| (du * du + dv * dv, dv, du));
        c
    }
}

/// Sum of absolute deviations of a block from its (integer) mean.
fn block_flatness(img: &GrayImage, x0: usize, y0: usize, size: usize) -> u32 {
    let sum: u32 = (0..size)
        .map(|j| img.row(y0 + j, x0, size).iter().map(|&p| p as u32).sum::<u32>())
        .sum();
    let mean = (sum + (size * size / 2) as u32) / (size * size) as u32;
    (0..size)
        .map(|j| {
            img.row(y0 + j, x0, size)
                .iter()
                .map(|&p| (p as u32).abs_diff(mean))
                .sum::<u32>()
        })
        .sum()
}

fn match_at(
    reference: &GrayImage,
    target: &GrayImage,
    x0: usize,
    y0: usize,
    size: usize,
    candidates: &[(i32, i32)],
    flat_threshold: Option<u32>,
) -> Result<MotionVector> {
    if let Some(th) = flat_threshold {
        if block_flatness(reference, x0, y0, size) < th {
            return Ok(MotionVector::new(0, 0, MotionVector::REJECTED_SAD));
        }
    }

    let max_x = target.width as i64 - size as i64;
    let max_y = target.height as i64 - size as i64;
    let mut best: Option<(i32, i32)> = None;
    let mut best_sad = u32::MAX;

    for &(du, dv) in candidates {
        let tx = x0 as i64 + du as i64;
        let ty = y0 as i64 + dv as i64;
        if tx < 0 || ty < 0 || tx > max_x || ty > max_y {
            continue;
        }
        let (tx, ty) = (tx as usize, ty as usize);
        let mut sad = 0u32;
        for j in 0..size {
            let a = reference.row(y0 + j, x0, size);
            let b = target.row(ty + j, tx, size);
            // at most size^2 * 255, far below u32::MAX
            sad = a
                .iter()
                .zip(b)
                .fold(sad, |acc, (&p, &q)| acc.wrapping_add(p.abs_diff(q) as u32));
            if sad >= best_sad {
                break;
            }
        }
        if sad < best_sad {
            best_sad = sad;
            best = Some((du, dv));
        }
    }

    let (du, dv) = best.ok_or_else(|| Error::domain("no candidate window inside the target image"))?;
    Ok(MotionVector::new(du, dv, best_sad.min(0xFFFF)))
}

/// Matches the macroblock centred at (`center_u`, `center_v`) of `reference`
/// against `target`. The block spans
/// `[center - size/2, center - size/2 + size)` on each axis.
pub fn match_block(
    reference: &GrayImage,
    target: &GrayImage,
    center_u: i64,
    center_v: i64,
    params: &MatchParams,
) -> Result<MotionVector> {
    params.validate()?;
    let size = params.macroblock_size;
    let x0 = center_u - (size / 2) as i64;
    let y0 = center_v - (size / 2) as i64;
    if x0 < 0
        || y0 < 0
        || x0 + size as i64 > reference.width as i64
        || y0 + size as i64 > reference.height as i64
    {
        return Err(Error::domain(format!(
            "block centred at ({center_u}, {center_v}) leaves the {}x{} reference",
            reference.width, reference.height
        )));
    }
    match_at(
        reference,
        target,
        x0 as usize,
        y0 as usize,
        size,
        &params.candidates(),
        params.flat_sad_threshold,
    )
}

/// Runs [`match_block`] on every whole macroblock of the grid. Blocks are
/// matched in parallel; the output does not depend on scheduling.
pub fn compute_flow_field(
    reference: &GrayImage,
    target: &GrayImage,
    timestamp: f64,
    frame_index: u32,
    params: &MatchParams,
) -> Result<FlowField> {
    params.validate()?;
    if (reference.width, reference.height) != (target.width, target.height) {
        return Err(Error::domain(format!(
            "image size mismatch: {}x{} vs {}x{}",
            reference.width, reference.height, target.width, target.height
        )));
    }
    let size = params.macroblock_size;
    let grid_w = reference.width / size;
    let grid_h = reference.height / size;
    let candidates = params.candidates();

    let vectors = (0..grid_w * grid_h)
        .into_par_iter()
        .map(|k| {
            let (col, row) = (k % grid_w, k / grid_w);
            match_at(
                reference,
                target,
                col * size,
                row * size,
                size,
                &candidates,
                params.flat_sad_threshold,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    FlowField::new(frame_index, timestamp, grid_w, grid_h, size, vectors)
}
