//! Ball, lens and two-centre region volumes.

use std::f64::consts::PI;

use super::quad::adaptive_simpson;
use super::{Conn, Flavor};
use crate::error::{Error, Result};

/// Volume of the unit ball in `R^d`, via `θ_d = θ_{d-2} · 2π/d`.
pub fn theta(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => theta(d - 2) * 2.0 * PI / d as f64,
    }
}

const LENS_TOL: f64 = 1e-10;

/// `|B_O(R) ∩ B_{sep·e1}(R)|` by integrating the spherical-cap profile
/// `(1 - u^2)^{(d-1)/2}`.
pub fn lens_volume(d: usize, radius: f64, sep: f64) -> Result<f64> {
    lens_volume_profile(d, radius, sep, (d as f64 - 1.0) / 2.0)
}

/// Lens volume with an arbitrary exponent on the cap profile:
/// `θ_d R^d - 2 θ_{d-1} R^d ∫_0^{sep/2R} (1 - u^2)^exponent du`.
///
/// Only `exponent = (d-1)/2` gives the true lens; other values exist so the
/// profile can be checked against independent volume estimates.
pub fn lens_volume_profile(d: usize, radius: f64, sep: f64, exponent: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("lens radius {radius} must be positive")));
    }
    if !(0.0..=2.0 * radius).contains(&sep) {
        return Err(Error::invalid(format!(
            "lens separation {sep} outside [0, 2R] for R = {radius}"
        )));
    }
    let upper = sep / (2.0 * radius);
    let cap = adaptive_simpson(
        &|u: f64| (1.0 - u * u).max(0.0).powf(exponent),
        0.0,
        upper,
        LENS_TOL,
    );
    let rd = radius.powi(d as i32);
    Ok((theta(d) * rd - 2.0 * theta(d - 1) * rd * cap).max(0.0))
}

/// Exact volume of `Q^{flavor,conn}` for two centres at distance `sep` with
/// ball radius `r` and dilation `s`, in `R^d`, `d >= 2`.
///
/// Rips regions and both down regions reduce to lenses and unions of balls.
/// The Čech up region (the `s`-neighbourhood of a lens) is integrated over
/// the symmetry axis, using the fact that each cross-section is a
/// `(d-1)`-ball whose radius is known in closed form piece by piece.
pub fn pair_region_volume(flavor: Flavor, conn: Conn, d: usize, r: f64, s: f64, sep: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid("pair region volumes need d >= 2"));
    }
    if !(r > 0.0) || !(s >= 0.0) || !(sep >= 0.0) {
        return Err(Error::invalid(format!("bad pair region r={r} s={s} sep={sep}")));
    }
    let big = r + s;
    let lens_or_zero = |sep: f64| -> Result<f64> {
        if sep >= 2.0 * big {
            Ok(0.0)
        } else {
            lens_volume(d, big, sep)
        }
    };
    match (flavor, conn) {
        (Flavor::Rips, Conn::Up) => lens_or_zero(sep),
        (_, Conn::Down) => Ok(2.0 * theta(d) * big.powi(d as i32) - lens_or_zero(sep)?),
        (Flavor::Cech, Conn::Up) => Ok(dilated_lens_volume(d, r, s, sep)),
    }
}

fn dilated_lens_volume(d: usize, r: f64, s: f64, sep: f64) -> f64 {
    if sep > 2.0 * r {
        return 0.0;
    }
    if sep == 0.0 {
        return theta(d) * (r + s).powi(d as i32);
    }
    let big = r + s;
    let h = (r * r - 0.25 * sep * sep).max(0.0).sqrt();
    let tan_phi = h / (0.5 * sep);
    let cos_phi = 0.5 * sep / r;
    let mid = 0.5 * sep;

    // sector of the ball around `c`: points whose projection onto the lens
    // lands on the arc of the sphere of radius r around `c`
    let sector = |x: f64| -> Option<f64> {
        if x < 0.0 {
            return None;
        }
        let outer = (big * big - x * x).max(0.0).sqrt();
        let upper = (x * tan_phi).min(outer);
        let lower = (r * r - x * x).max(0.0).sqrt();
        (upper >= lower && x <= big).then_some(upper)
    };
    let rho_max = |x: f64| -> f64 {
        let mut best: f64 = -1.0;
        let k = (r * r - x * x).min(r * r - (x - sep) * (x - sep));
        if k >= 0.0 {
            best = best.max(k.sqrt());
        }
        if let Some(u) = sector(x) {
            best = best.max(u);
        }
        if let Some(u) = sector(sep - x) {
            best = best.max(u);
        }
        let t = s * s - (x - mid) * (x - mid);
        if t >= 0.0 {
            best = best.max(h + t.sqrt());
        }
        best
    };
    let cross = theta(d - 1);
    let f = |x: f64| {
        let rho = rho_max(x);
        if rho <= 0.0 {
            0.0
        } else {
            cross * rho.powi(d as i32 - 1)
        }
    };
    let lo = sep - big;
    let hi = big;
    let mut cuts = vec![
        lo,
        hi,
        0.0,
        sep,
        mid,
        mid - s,
        mid + s,
        big * cos_phi,
        sep - big * cos_phi,
        r,
        sep - r,
    ];
    cuts.retain(|c| *c >= lo && *c <= hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let scale = theta(d) * big.powi(d as i32);
    cuts.windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], 1e-13 * scale))
        .sum()
}
