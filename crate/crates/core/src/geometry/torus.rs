use crate::error::{Error, Result};

/// Largest torus distance for which a chart lift is accepted.
pub const CHART_LIMIT: f64 = 0.25;

/// A point of the flat unit torus `[0,1)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid("torus dimension must be at least 2"));
        }
        if let Some(c) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::invalid(format!("coordinate {c} outside [0,1)")));
        }
        Ok(TorusPoint(coords))
    }

    /// Reduces arbitrary real coordinates modulo 1.
    pub fn wrapped(coords: &[f64]) -> Self {
        TorusPoint(coords.iter().map(|&c| wrap(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for TorusPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Reduces `x` into `[0,1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let w = x - x.floor();
    // x.floor() can round so that w == 1.0 for tiny negative x
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

#[inline]
fn coord_gap(a: f64, b: f64) -> f64 {
    let g = (a - b).abs();
    g.min(1.0 - g)
}

/// Squared toroidal distance with no dimension check.
#[inline]
pub(crate) fn torus_dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let g = coord_gap(a, b);
            g * g
        })
        .sum()
}

#[inline]
pub fn torus_dist_unchecked(x: &[f64], y: &[f64]) -> f64 {
    torus_dist_sq(x, y).sqrt()
}

/// Toroidal distance `inf_z ||x - y + z||` over integer shifts `z`.
pub fn torus_dist(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(torus_dist_unchecked(x, y))
}

/// Writes the representative of `x` nearest to `base` into `out` (no guard).
#[inline]
pub(crate) fn lift_into(base: &[f64], x: &[f64], out: &mut [f64]) {
    for ((o, &b), &c) in out.iter_mut().zip(base).zip(x) {
        let mut delta = c - b;
        delta -= delta.round();
        *o = b + delta;
    }
}

/// Euclidean representative `x + z` closest to `base`.
///
/// Fails when the torus distance is 1/4 or more: beyond that the lifted
/// picture of a face and its neighbourhood may not fit a single chart.
pub fn nearest_image(base: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let d = torus_dist(base, x)?;
    if d >= CHART_LIMIT {
        return Err(Error::chart(format!(
            "torus distance {d} between base and point is not below {CHART_LIMIT}"
        )));
    }
    let mut out = vec![0.0; base.len()];
    lift_into(base, x, &mut out);
    Ok(out)
}
