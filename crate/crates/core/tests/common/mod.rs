//! Independent reference implementations used to check the library.
#![allow(dead_code)]

use egoflow::GrayImage;

/// Exhaustive SAD search written directly from the definition: every
/// displacement on the `step` grid within `range`, windows leaving the target
/// skipped, full sums (no early exit), ties to the smallest `du^2 + dv^2`,
/// then smallest `dv`, then smallest `du`.
pub fn brute_force_block(
    reference: &GrayImage,
    target: &GrayImage,
    x0: usize,
    y0: usize,
    size: usize,
    range: i32,
    step: i32,
) -> Option<(i32, i32, u32)> {
    let mut best: Option<(u32, i32, i32, i32, i32)> = None;
    let mut dv = -range;
    while dv <= range {
        let mut du = -range;
        while du <= range {
            let tx = x0 as i64 + du as i64;
            let ty = y0 as i64 + dv as i64;
            let inside = tx >= 0
                && ty >= 0
                && tx + size as i64 <= target.width as i64
                && ty + size as i64 <= target.height as i64;
            if inside {
                let mut sad = 0u32;
                for j in 0..size {
                    for i in 0..size {
                        let a = reference.get(x0 + i, y0 + j) as i32;
                        let b = target.get(tx as usize + i, ty as usize + j) as i32;
                        sad += (a - b).unsigned_abs();
                    }
                }
                let key = (sad, du * du + dv * dv, dv, du, 0);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
            du += step;
        }
        dv += step;
    }
    best.map(|(sad, _, dv, du, _)| (du, dv, sad.min(0xFFFF)))
}

/// Geodesic distance on the WGS-84 ellipsoid by Vincenty's inverse formula.
/// Degrees in, metres out.
pub fn vincenty_distance(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let a = 6_378_137.0_f64;
    let f = 1.0 / 298.257_223_563;
    let b = a * (1.0 - f);

    let l = (lon2 - lon1).to_radians();
    let u1 = ((1.0 - f) * lat1.to_radians().tan()).atan();
    let u2 = ((1.0 - f) * lat2.to_radians().tan()).atan();
    let (su1, cu1) = u1.sin_cos();
    let (su2, cu2) = u2.sin_cos();

    let mut lambda = l;
    for _ in 0..200 {
        let (sl, cl) = lambda.sin_cos();
        let sin_sigma = ((cu2 * sl).powi(2) + (cu1 * su2 - su1 * cu2 * cl).powi(2)).sqrt();
        if sin_sigma == 0.0 {
            return 0.0;
        }
        let cos_sigma = su1 * su2 + cu1 * cu2 * cl;
        let sigma = sin_sigma.atan2(cos_sigma);
        let sin_alpha = cu1 * cu2 * sl / sin_sigma;
        let cos2_alpha = 1.0 - sin_alpha * sin_alpha;
        let cos_2sm = if cos2_alpha == 0.0 {
            0.0
        } else {
            cos_sigma - 2.0 * su1 * su2 / cos2_alpha
        };
        let c = f / 16.0 * cos2_alpha * (4.0 + f * (4.0 - 3.0 * cos2_alpha));
        let prev = lambda;
        lambda = l
            + (1.0 - c)
                * f
                * sin_alpha
                * (sigma + c * sin_sigma * (cos_2sm + c * cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)));
        if (lambda - prev).abs() < 1e-13 {
            let u_sq = cos2_alpha * (a * a - b * b) / (b * b);
            let big_a = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)));
            let big_b = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)));
            let delta_sigma = big_b
                * sin_sigma
                * (cos_2sm
                    + big_b / 4.0
                        * (cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)
                            - big_b / 6.0
                                * cos_2sm
                                * (-3.0 + 4.0 * sin_sigma * sin_sigma)
                                * (-3.0 + 4.0 * cos_2sm * cos_2sm)));
            return b * big_a * (sigma - delta_sigma);
        }
    }
    panic!("Vincenty inverse did not converge");
}

/// Random 8-bit image from a seeded generator, with an optional palette of
/// only `levels` grey values (few levels produce many SAD ties).
pub fn random_image(rng: &mut impl rand::Rng, w: usize, h: usize, levels: u32) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| {
        let k = rng.random_range(0..levels);
        (k * 255 / (levels - 1).max(1)) as u8
    })
}

/// `img` translated by `(du, dv)`: output pixel `(u, v)` = input
/// `(u - du, v - dv)`, with `fill` where that falls outside.
pub fn translate(img: &GrayImage, du: i64, dv: i64, fill: u8) -> GrayImage {
    GrayImage::from_fn(img.width, img.height, |u, v| {
        let (x, y) = (u as i64 - du, v as i64 - dv);
        if x >= 0 && y >= 0 && (x as usize) < img.width && (y as usize) < img.height {
            img.get(x as usize, y as usize)
        } else {
            fill
        }
    })
}
