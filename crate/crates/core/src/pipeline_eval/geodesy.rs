use crate::error::{Error, Result};

/// WGS-84 semi-major axis, metres.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS-84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

fn e2() -> f64 {
    WGS84_F * (2.0 - WGS84_F)
}

/// Meridional radius of curvature at geodetic latitude `lat` (radians).
pub fn meridional_radius(lat: f64) -> f64 {
    let w2 = 1.0 - e2() * lat.sin().powi(2);
    WGS84_A * (1.0 - e2()) / (w2 * w2.sqrt())
}

/// Prime-vertical radius of curvature at geodetic latitude `lat` (radians).
pub fn prime_vertical_radius(lat: f64) -> f64 {
    WGS84_A / (1.0 - e2() * lat.sin().powi(2)).sqrt()
}

/// Local east/north metres of `(lat, lon)` relative to the origin, on the
/// tangent plane at the origin. Degrees in, metres out.
pub fn geodetic_to_local(lat: f64, lon: f64, origin_lat: f64, origin_lon: f64) -> Result<(f64, f64)> {
    for (name, v) in [("lat", lat), ("origin_lat", origin_lat)] {
        if !(v.abs() < 89.0) {
            return Err(Error::domain(format!("{name} = {v} deg, need |lat| < 89")));
        }
    }
    if !(lon.is_finite() && origin_lon.is_finite()) {
        return Err(Error::domain("longitude must be finite"));
    }
    let phi0 = origin_lat.to_radians();
    let dlat = (lat - origin_lat).to_radians();
    // wrap so that points across the antimeridian stay close
    let dlon = ((lon - origin_lon + 180.0).rem_euclid(360.0) - 180.0).to_radians();
    Ok((
        dlon * prime_vertical_radius(phi0) * phi0.cos(),
        dlat * meridional_radius(phi0),
    ))
}
