//! Toroidal metric, enclosing balls, closed-form volumes and the connection
//! regions `Q^{p,q}` used to decide isolation.
//!
//! All balls are closed. Comparisons against a radius go through [`within`],
//! which admits a relative slack of [`TIE_REL`] so that configurations placed
//! exactly on a boundary (pair at distance `2r`, circumradius equal to `r`)
//! are not lost to rounding.

mod miniball;
pub mod quad;
mod region;
pub(crate) mod torus;
mod volume;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use miniball::{miniball, miniball_radius, Ball};
pub(crate) use miniball::miniball_radius_flat;
pub use region::{
    bounding_box, distance_to_ball_intersection, mc_region_volume, mc_region_volume_crn,
    region_contains, region_volume, BoundingBox, RegionSpec, VolumeMethod,
};
pub use torus::{nearest_image, torus_dist, torus_dist_unchecked, wrap, TorusPoint, CHART_LIMIT};
pub use volume::{lens_volume, lens_volume_profile, pair_region_volume, theta};

use crate::error::Error;

/// Relative slack used for closed-ball comparisons.
pub const TIE_REL: f64 = 1e-12;

/// `value <= bound` up to the closed-ball tie slack.
#[inline]
pub fn within(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + TIE_REL) + f64::MIN_POSITIVE
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// Which complex: Čech (common intersection) or Vietoris-Rips (pairwise).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "C", alias = "cech", alias = "Cech")]
    Cech,
    #[serde(rename = "R", alias = "rips", alias = "Rips")]
    Rips,
}

/// Up- or down-connectivity between k-faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Conn {
    #[serde(rename = "U", alias = "up", alias = "Up")]
    Up,
    #[serde(rename = "D", alias = "down", alias = "Down")]
    Down,
}

impl Flavor {
    pub const ALL: [Flavor; 2] = [Flavor::Cech, Flavor::Rips];

    pub fn code(self) -> &'static str {
        match self {
            Flavor::Cech => "C",
            Flavor::Rips => "R",
        }
    }
}

impl Conn {
    pub const ALL: [Conn; 2] = [Conn::Up, Conn::Down];

    pub fn code(self) -> &'static str {
        match self {
            Conn::Up => "U",
            Conn::Down => "D",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl fmt::Display for Conn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "c" | "cech" => Ok(Flavor::Cech),
            "r" | "rips" | "vr" => Ok(Flavor::Rips),
            _ => Err(Error::Parse(format!("unknown flavor {s:?}"))),
        }
    }
}

impl FromStr for Conn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "u" | "up" => Ok(Conn::Up),
            "d" | "down" => Ok(Conn::Down),
            _ => Err(Error::Parse(format!("unknown connectivity {s:?}"))),
        }
    }
}

/// All four `(flavor, conn)` pairs in a fixed order.
pub fn all_pairs() -> [(Flavor, Conn); 4] {
    [
        (Flavor::Cech, Conn::Up),
        (Flavor::Cech, Conn::Down),
        (Flavor::Rips, Conn::Up),
        (Flavor::Rips, Conn::Down),
    ]
}
