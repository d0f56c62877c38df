//! Procedural ground texture: multi-octave value noise on a hashed lattice.

/// Number of noise octaves; each halves the cell size of the previous one.
pub const OCTAVES: u32 = 4;
/// Amplitude ratio between successive octaves.
pub const PERSISTENCE: f64 = 0.5;
/// Octave sums cluster around mid-grey; this stretch (with clamping) spreads
/// them over the full intensity range.
pub const CONTRAST: f64 = 2.0;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in `[0, 1)` attached to a lattice node.
#[inline]
fn lattice(seed: u64, octave: u32, ix: i64, iy: i64) -> f64 {
    let h = splitmix64(
        seed ^ splitmix64(octave as u64 ^ splitmix64(ix as u64 ^ splitmix64(iy as u64))),
    );
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn value_noise(seed: u64, octave: u32, x: f64, y: f64) -> f64 {
    let (fx, fy) = (x.floor(), y.floor());
    let (ix, iy) = (fx as i64, fy as i64);
    let (sx, sy) = (fade(x - fx), fade(y - fy));
    let v00 = lattice(seed, octave, ix, iy);
    let v10 = lattice(seed, octave, ix + 1, iy);
    let v01 = lattice(seed, octave, ix, iy + 1);
    let v11 = lattice(seed, octave, ix + 1, iy + 1);
    let top = v00 + sx * (v10 - v00);
    let bottom = v01 + sx * (v11 - v01);
    top + sy * (bottom - top)
}

/// Unquantized texture intensity in `[0, 1]` at ground point `(x, y)` metres.
/// `scale` is the size of the coarsest noise cell in metres.
pub fn texture_value(seed: u64, x: f64, y: f64, scale: f64) -> f64 {
    let mut sum = 0.0;
    let mut norm = 0.0;
    let mut amp = 1.0;
    let mut freq = 1.0 / scale;
    for o in 0..OCTAVES {
        sum += amp * value_noise(seed, o, x * freq, y * freq);
        norm += amp;
        amp *= PERSISTENCE;
        freq *= 2.0;
    }
    (0.5 + (sum / norm - 0.5) * CONTRAST).clamp(0.0, 1.0)
}

/// Texture intensity quantized to 8 bits. Pure function of its arguments.
pub fn texture_sample(seed: u64, x: f64, y: f64, scale: f64) -> u8 {
    debug_assert!(scale > 0.0);
    (texture_value(seed, x, y, scale) * 255.0).round() as u8
}
