//! Rigid image-plane motion from a motion-vector field, and removal of the
//! apparent translation caused by roll/pitch between frames.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flow_core::{CameraIntrinsics, FlowField, GyroSample, RigidTransform2D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    pub iterations: usize,
    /// Maximum residual, in pixels, for a vector to count as an inlier.
    pub inlier_threshold: f64,
    pub min_inliers: usize,
    /// Only consumed by [`ransac_iterations`].
    pub confidence: f64,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        // 210 iterations: two-vector samples, up to 85 % outliers, p = 0.99.
        RansacParams {
            iterations: 210,
            inlier_threshold: 3.0,
            min_inliers: 6,
            confidence: 0.99,
            seed: 0,
        }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::domain("RANSAC needs at least one iteration"));
        }
        if !(self.inlier_threshold > 0.0) {
            return Err(Error::domain("inlier threshold must be > 0"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::domain("confidence must be in (0, 1)"));
        }
        Ok(())
    }
}

/// A point in frame `t` and where it moved to in frame `t + dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub src_u: f64,
    pub src_v: f64,
    pub dst_u: f64,
    pub dst_v: f64,
}

impl Correspondence {
    pub fn new(src: (f64, f64), dst: (f64, f64)) -> Self {
        Correspondence {
            src_u: src.0,
            src_v: src.1,
            dst_u: dst.0,
            dst_v: dst.1,
        }
    }

    pub fn residual(&self, xf: &RigidTransform2D) -> f64 {
        let (u, v) = xf.apply((self.src_u, self.src_v));
        (u - self.dst_u).hypot(v - self.dst_v)
    }
}

/// Turns the non-rejected vectors of a field into correspondences between
/// macroblock centres, with coordinates relative to `origin`. Returns the
/// correspondences together with their block indices.
pub fn field_correspondences(field: &FlowField, origin: (f64, f64)) -> (Vec<Correspondence>, Vec<usize>) {
    let mut pairs = Vec::with_capacity(field.vectors.len());
    let mut idx = Vec::with_capacity(field.vectors.len());
    for (k, mv) in field.vectors.iter().enumerate() {
        if mv.is_rejected() {
            continue;
        }
        let (cu, cv) = field.block_center(k % field.grid_w, k / field.grid_w);
        let src = (cu - origin.0, cv - origin.1);
        pairs.push(Correspondence::new(src, (src.0 + mv.du as f64, src.1 + mv.dv as f64)));
        idx.push(k);
    }
    (pairs, idx)
}

/// Least-squares rotation angle taking `src` onto `dst` about the origin
/// (no translation): `atan2(sum cross, sum dot)`.
pub(crate) fn fit_rotation(points: impl Iterator<Item = ((f64, f64), (f64, f64))>) -> Option<f64> {
    let (mut cross, mut dot) = (0.0, 0.0);
    for ((sx, sy), (dx, dy)) in points {
        cross += sx * dy - sy * dx;
        dot += sx * dx + sy * dy;
    }
    (cross != 0.0 || dot != 0.0).then(|| cross.atan2(dot))
}

/// Closed-form least-squares rigid transform (rotation + translation, no
/// scale) minimising `sum |R src + t - dst|^2`.
pub fn fit_rigid_2d(pairs: &[Correspondence]) -> Result<RigidTransform2D> {
    if pairs.len() < 2 {
        return Err(Error::Degenerate(format!("{} correspondences, need 2", pairs.len())));
    }
    let n = pairs.len() as f64;
    let (mut su, mut sv, mut du, mut dv) = (0.0, 0.0, 0.0, 0.0);
    for p in pairs {
        su += p.src_u;
        sv += p.src_v;
        du += p.dst_u;
        dv += p.dst_v;
    }
    let src_c = (su / n, sv / n);
    let dst_c = (du / n, dv / n);

    let spread: f64 = pairs
        .iter()
        .map(|p| (p.src_u - src_c.0).powi(2) + (p.src_v - src_c.1).powi(2))
        .sum();
    if spread == 0.0 {
        return Err(Error::Degenerate("all source points coincide".into()));
    }

    // A non-zero spread with an all-zero cross/dot sum means dst collapsed to
    // a point; rotation is arbitrary, take 0.
    let theta = fit_rotation(pairs.iter().map(|p| {
        (
            (p.src_u - src_c.0, p.src_v - src_c.1),
            (p.dst_u - dst_c.0, p.dst_v - dst_c.1),
        )
    }))
    .unwrap_or(0.0);

    let (s, c) = theta.sin_cos();
    Ok(RigidTransform2D::new(
        theta,
        dst_c.0 - (c * src_c.0 - s * src_c.1),
        dst_c.1 - (s * src_c.0 + c * src_c.1),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacOutcome {
    pub transform: RigidTransform2D,
    /// One entry per input correspondence.
    pub inliers: Vec<bool>,
    pub inlier_count: usize,
}

/// Scores a hypothesis: (inlier count, summed inlier residual).
fn score(pairs: &[Correspondence], xf: &RigidTransform2D, threshold: f64) -> (usize, f64) {
    let (s, c) = xf.theta.sin_cos();
    let mut count = 0;
    let mut total = 0.0;
    for p in pairs {
        let eu = c * p.src_u - s * p.src_v + xf.tx - p.dst_u;
        let ev = s * p.src_u + c * p.src_v + xf.ty - p.dst_v;
        let r = eu.hypot(ev);
        if r <= threshold {
            count += 1;
            total += r;
        }
    }
    (count, total)
}

/// RANSAC over two-point samples. The hypothesis with the most inliers wins,
/// ties going to the lower summed inlier residual and then to the earlier
/// iteration; the winner is refitted on its inlier set.
pub fn ransac_pairs(pairs: &[Correspondence], params: &RansacParams) -> Result<RansacOutcome> {
    params.validate()?;
    let required = params.min_inliers.max(2);
    if pairs.len() < 2 {
        return Err(Error::NoConsensus {
            best: pairs.len(),
            required,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(usize, f64, RigidTransform2D)> = None;
    for _ in 0..params.iterations {
        let sample = index::sample(&mut rng, pairs.len(), 2);
        let Ok(xf) = fit_rigid_2d(&[pairs[sample.index(0)], pairs[sample.index(1)]]) else {
            continue;
        };
        let (count, residual) = score(pairs, &xf, params.inlier_threshold);
        let better = match best {
            None => true,
            Some((bc, br, _)) => count > bc || (count == bc && residual < br),
        };
        if better {
            best = Some((count, residual, xf));
        }
    }

    let Some((count, _, hypothesis)) = best else {
        return Err(Error::NoConsensus { best: 0, required });
    };
    if count < required {
        return Err(Error::NoConsensus { best: count, required });
    }

    let inliers: Vec<bool> = pairs
        .iter()
        .map(|p| p.residual(&hypothesis) <= params.inlier_threshold)
        .collect();
    let inlier_pairs: Vec<Correspondence> = pairs
        .iter()
        .zip(&inliers)
        .filter_map(|(p, &keep)| keep.then_some(*p))
        .collect();
    let transform = fit_rigid_2d(&inlier_pairs)?;
    Ok(RansacOutcome {
        transform,
        inlier_count: inlier_pairs.len(),
        inliers,
    })
}

/// RANSAC on a flow field, with block centres measured from the principal
/// point so that the fitted rotation is about the optical axis. The inlier
/// mask is indexed by macroblock; rejected blocks are never inliers.
pub fn ransac_rigid(
    field: &FlowField,
    cam: &CameraIntrinsics,
    params: &RansacParams,
) -> Result<RansacOutcome> {
    let (pairs, idx) = field_correspondences(field, (cam.cx, cam.cy));
    let outcome = ransac_pairs(&pairs, params)?;
    let mut mask = vec![false; field.vectors.len()];
    for (&k, &inl) in idx.iter().zip(&outcome.inliers) {
        mask[k] = inl;
    }
    Ok(RansacOutcome {
        inliers: mask,
        ..outcome
    })
}

/// Iterations needed so that, with probability `confidence`, at least one
/// sample of `sample_size` points is outlier-free.
pub fn ransac_iterations(outlier_ratio: f64, sample_size: u32, confidence: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&outlier_ratio) {
        return Err(Error::domain(format!("outlier ratio {outlier_ratio} not in [0, 1)")));
    }
    if sample_size == 0 {
        return Err(Error::domain("sample size must be >= 1"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!("confidence {confidence} not in (0, 1)")));
    }
    let p_good = (1.0 - outlier_ratio).powi(sample_size as i32);
    if p_good >= 1.0 {
        return Ok(1);
    }
    let n = ((1.0 - confidence).ln() / (1.0 - p_good).ln()).ceil();
    Ok((n as usize).max(1))
}

fn interpolate(samples: &[GyroSample], t: f64) -> [f64; 3] {
    let rates = |s: &GyroSample| [s.wx, s.wy, s.wz];
    let i = samples.partition_point(|s| s.timestamp <= t);
    if i == 0 {
        return rates(&samples[0]);
    }
    if i == samples.len() {
        return rates(&samples[i - 1]);
    }
    let (a, b) = (&samples[i - 1], &samples[i]);
    let span = b.timestamp - a.timestamp;
    if span <= 0.0 {
        return rates(b);
    }
    let w = (t - a.timestamp) / span;
    let (ra, rb) = (rates(a), rates(b));
    [0, 1, 2].map(|k| ra[k] + w * (rb[k] - ra[k]))
}

/// Time-weighted mean body rates over `[t0, t1]`: the log is treated as a
/// piecewise-linear signal, held constant beyond its first and last samples,
/// and integrated with the trapezoid rule.
pub fn average_gyro(samples: &[GyroSample], t0: f64, t1: f64) -> Result<(f64, f64, f64)> {
    if samples.is_empty() {
        return Err(Error::domain("empty gyro log"));
    }
    if !(t1 > t0) {
        return Err(Error::domain(format!("empty interval [{t0}, {t1}]")));
    }
    let lo = samples.partition_point(|s| s.timestamp <= t0);
    let hi = samples.partition_point(|s| s.timestamp < t1);
    let knots = std::iter::once(t0)
        .chain(samples[lo..hi.max(lo)].iter().map(|s| s.timestamp))
        .chain(std::iter::once(t1));

    let mut acc = [0.0; 3];
    let mut prev: Option<(f64, [f64; 3])> = None;
    for t in knots {
        let r = interpolate(samples, t);
        if let Some((tp, rp)) = prev {
            let h = t - tp;
            for k in 0..3 {
                acc[k] += 0.5 * h * (rp[k] + r[k]);
            }
        }
        prev = Some((t, r));
    }
    let span = t1 - t0;
    Ok((acc[0] / span, acc[1] / span, acc[2] / span))
}

/// Image-plane shift induced by rotating through `angle` radians: `f tan(angle)`.
pub fn rotation_shift_px(angle: f64, focal_px: f64) -> f64 {
    focal_px * angle.tan()
}

/// Removes the roll/pitch contribution from a fitted translation:
/// `tx - f tan(wy dt)`, `ty - f tan(wx dt)`.
pub fn compensate_rotation(
    (tx, ty): (f64, f64),
    (wx, wy): (f64, f64),
    dt: f64,
    cam: &CameraIntrinsics,
) -> Result<(f64, f64)> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("dt must be > 0, got {dt}")));
    }
    let (ax, ay) = (wx * dt, wy * dt);
    let limit = std::f64::consts::FRAC_PI_2;
    if !(ax.abs() < limit && ay.abs() < limit) {
        return Err(Error::domain(format!(
            "rotation ({ax}, {ay}) rad per frame reaches the tangent singularity"
        )));
    }
    Ok((
        tx - rotation_shift_px(ay, cam.focal_px),
        ty - rotation_shift_px(ax, cam.focal_px),
    ))
}
