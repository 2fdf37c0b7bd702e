//! Connection regions `Q^{p,q}(x, r, s)` of a face.
//!
//! For a face with (chart-lifted) centres `x_1..x_{k+1}`:
//!
//! - Čech/up: the `s`-neighbourhood of `∩_j B(x_j, r)`;
//! - Čech/down: the union over `i` of the `s`-neighbourhoods of the
//!   leave-one-out intersections `∩_{j≠i} B(x_j, r)`;
//! - Rips/up: `∩_j B(x_j, r + s)`;
//! - Rips/down: the union over `i` of `∩_{j≠i} B(x_j, r + s)`.
//!
//! A point `y` lies in the up region at `s = r` exactly when adding `y` to
//! the face yields a `(k+1)`-face at radius `r`, and in the down region when
//! swapping some vertex for `y` yields a `k`-face. For Čech with `s = r`
//! membership is therefore a smallest-enclosing-ball test; general `s` uses
//! Dykstra's alternating projections onto the ball intersection.

use std::cell::RefCell;

use rand::Rng;

use super::miniball::miniball_radius_flat;
use super::{dist, dist_sq, pair_region_volume, within, Conn, Flavor};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RegionSpec {
    pub flavor: Flavor,
    pub conn: Conn,
    d: usize,
    centers: Vec<f64>,
    pub r: f64,
    pub s: f64,
}

impl RegionSpec {
    pub fn new(flavor: Flavor, conn: Conn, centers: &[Vec<f64>], r: f64, s: f64) -> Result<Self> {
        let d = centers.first().ok_or(Error::Empty("region without centres"))?.len();
        let mut flat = Vec::with_capacity(d * centers.len());
        for c in centers {
            if c.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.len(),
                });
            }
            flat.extend_from_slice(c);
        }
        Self::from_flat(flavor, conn, d, flat, r, s)
    }

    /// Centres stored row-major, `d` coordinates each.
    pub fn from_flat(flavor: Flavor, conn: Conn, d: usize, centers: Vec<f64>, r: f64, s: f64) -> Result<Self> {
        if d == 0 || centers.is_empty() || !centers.len().is_multiple_of(d) {
            return Err(Error::invalid("centre buffer length must be a positive multiple of d"));
        }
        if !(r > 0.0) || !(s >= 0.0) {
            return Err(Error::invalid(format!("region needs r > 0 and s >= 0, got r={r} s={s}")));
        }
        if conn == Conn::Down && centers.len() / d < 2 {
            return Err(Error::invalid("down regions need at least two centres (k >= 1)"));
        }
        Ok(RegionSpec {
            flavor,
            conn,
            d,
            centers,
            r,
            s,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Replaces centres and radii in place, keeping flavor, conn and `d`.
    pub(crate) fn reset(&mut self, centers: &[f64], r: f64, s: f64) {
        self.centers.clear();
        self.centers.extend_from_slice(centers);
        self.r = r;
        self.s = s;
    }

    /// Face dimension `k` (number of centres minus one).
    pub fn k(&self) -> usize {
        self.centers.len() / self.d - 1
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.d..(i + 1) * self.d]
    }

    pub fn centers_flat(&self) -> &[f64] {
        &self.centers
    }

    fn n_centers(&self) -> usize {
        self.centers.len() / self.d
    }

    /// Same region with every length multiplied by `lambda` (about the origin).
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::from_flat(
            self.flavor,
            self.conn,
            self.d,
            self.centers.iter().map(|c| c * lambda).collect(),
            self.r * lambda,
            self.s * lambda,
        )
    }
}

thread_local! {
    static BUF: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// Exact membership of the Euclidean point `y` (same chart as the centres).
pub fn region_contains(region: &RegionSpec, y: &[f64]) -> bool {
    let n = region.n_centers();
    let reach = region.r + region.s;
    match (region.flavor, region.conn) {
        (Flavor::Rips, Conn::Up) => (0..n).all(|j| within(dist(y, region.center(j)), reach)),
        (Flavor::Rips, Conn::Down) => {
            let mut far = 0;
            for j in 0..n {
                if !within(dist(y, region.center(j)), reach) {
                    far += 1;
                    if far > 1 {
                        return false;
                    }
                }
            }
            true
        }
        (Flavor::Cech, Conn::Up) => {
            if !(0..n).all(|j| within(dist(y, region.center(j)), reach)) {
                return false;
            }
            cech_dilated_contains(region, y, None)
        }
        (Flavor::Cech, Conn::Down) => {
            let mut far = None;
            for j in 0..n {
                if !within(dist(y, region.center(j)), reach) {
                    if far.is_some() {
                        return false;
                    }
                    far = Some(j);
                }
            }
            match far {
                Some(i) => cech_dilated_contains(region, y, Some(i)),
                None => (0..n).any(|i| cech_dilated_contains(region, y, Some(i))),
            }
        }
    }
}

/// `dist(y, ∩_{j≠skip} B(x_j, r)) <= s`.
fn cech_dilated_contains(region: &RegionSpec, y: &[f64], skip: Option<usize>) -> bool {
    let d = region.d;
    if region.s == region.r {
        BUF.with(|b| {
            let mut buf = b.borrow_mut();
            buf.clear();
            for j in 0..region.n_centers() {
                if Some(j) != skip {
                    buf.extend_from_slice(region.center(j));
                }
            }
            buf.extend_from_slice(y);
            within(miniball_radius_flat(&buf, d), region.r)
        })
    } else {
        let centers: Vec<&[f64]> = (0..region.n_centers())
            .filter(|&j| Some(j) != skip)
            .map(|j| region.center(j))
            .collect();
        match distance_to_ball_intersection(y, &centers, region.r) {
            Some(dd) => within(dd, region.s),
            None => false,
        }
    }
}

const DYKSTRA_TOL: f64 = 1e-10;
const DYKSTRA_MAX_CYCLES: usize = 10_000;

/// Distance from `y` to `∩_j B(c_j, r)` by Dykstra's alternating projections;
/// `None` when the intersection is empty.
pub fn distance_to_ball_intersection(y: &[f64], centers: &[&[f64]], r: f64) -> Option<f64> {
    let d = y.len();
    let flat: Vec<f64> = centers.iter().flat_map(|c| c.iter().copied()).collect();
    if !within(miniball_radius_flat(&flat, d), r) {
        return None;
    }
    if centers.iter().all(|c| dist(y, c) <= r) {
        return Some(0.0);
    }
    let m = centers.len();
    let mut x = y.to_vec();
    let mut incr = vec![0.0; m * d];
    let mut z = vec![0.0; d];
    for _ in 0..DYKSTRA_MAX_CYCLES {
        let mut moved: f64 = 0.0;
        for (j, c) in centers.iter().enumerate() {
            let p = &mut incr[j * d..(j + 1) * d];
            for i in 0..d {
                z[i] = x[i] + p[i];
            }
            let dz = dist(&z, c);
            let scale = if dz > r { r / dz } else { 1.0 };
            for i in 0..d {
                let proj = c[i] + (z[i] - c[i]) * scale;
                p[i] = z[i] - proj;
                moved = moved.max((proj - x[i]).abs());
                x[i] = proj;
            }
        }
        if moved < DYKSTRA_TOL {
            break;
        }
    }
    Some(dist(y, &x))
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    fn union(self, other: BoundingBox) -> BoundingBox {
        BoundingBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

/// Box of `∩_{j≠skip} B(x_j, rho)`, expanded by `grow`; `None` if empty.
fn intersection_box(region: &RegionSpec, skip: Option<usize>, rho: f64, grow: f64) -> Option<BoundingBox> {
    let d = region.d;
    let mut lo = vec![f64::NEG_INFINITY; d];
    let mut hi = vec![f64::INFINITY; d];
    for j in (0..region.n_centers()).filter(|&j| Some(j) != skip) {
        for (i, c) in region.center(j).iter().enumerate() {
            lo[i] = lo[i].max(c - rho);
            hi[i] = hi[i].min(c + rho);
        }
    }
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return None;
    }
    Some(BoundingBox {
        lo: lo.iter().map(|l| l - grow).collect(),
        hi: hi.iter().map(|h| h + grow).collect(),
    })
}

/// Axis-aligned box containing the region (tight for Rips/up and single balls).
pub fn bounding_box(region: &RegionSpec) -> Result<BoundingBox> {
    let (rho, grow) = match region.flavor {
        Flavor::Rips => (region.r + region.s, 0.0),
        Flavor::Cech => (region.r, region.s),
    };
    let bx = match region.conn {
        Conn::Up => intersection_box(region, None, rho, grow),
        Conn::Down => (0..region.n_centers())
            .filter_map(|i| intersection_box(region, Some(i), rho, grow))
            .reduce(BoundingBox::union),
    };
    match bx {
        Some(b) if b.volume() > 0.0 => Ok(b),
        _ => Err(Error::DegenerateRegion("bounding box is empty or flat".into())),
    }
}

pub const MIN_MC_SAMPLES: usize = 1000;

/// Rejection-sampling volume over the bounding box: `(estimate, stderr)` with
/// `stderr = box_vol · sqrt(p(1-p)/samples)`.
pub fn mc_region_volume<R: Rng + ?Sized>(region: &RegionSpec, samples: usize, rng: &mut R) -> Result<(f64, f64)> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_MC_SAMPLES} samples, got {samples}")));
    }
    let bx = bounding_box(region)?;
    let d = region.d;
    let mut y = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..samples {
        for i in 0..d {
            y[i] = rng.random_range(bx.lo[i]..bx.hi[i]);
        }
        hits += region_contains(region, &y) as usize;
    }
    Ok(binomial_volume(bx.volume(), hits, samples))
}

/// Same estimator on frozen unit-cube samples (row-major, `d` per sample),
/// mapped affinely into the region's box. Reusing one sample set across
/// nearby regions gives common random numbers.
pub fn mc_region_volume_crn(region: &RegionSpec, unit: &[f64]) -> Result<(f64, f64)> {
    let d = region.d;
    let samples = unit.len() / d;
    if samples == 0 {
        return Err(Error::invalid("no unit samples"));
    }
    let bx = bounding_box(region)?;
    let width: Vec<f64> = bx.lo.iter().zip(&bx.hi).map(|(l, h)| h - l).collect();
    let mut y = vec![0.0; d];
    let mut hits = 0usize;
    for u in unit.chunks_exact(d) {
        for i in 0..d {
            y[i] = bx.lo[i] + u[i] * width[i];
        }
        hits += region_contains(region, &y) as usize;
    }
    Ok(binomial_volume(bx.volume(), hits, samples))
}

fn binomial_volume(box_vol: f64, hits: usize, samples: usize) -> (f64, f64) {
    let p = hits as f64 / samples as f64;
    (box_vol * p, box_vol * (p * (1.0 - p) / samples as f64).sqrt())
}

/// How region volumes are obtained where a caller has a choice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VolumeMethod {
    /// Rejection sampling with the given number of samples.
    MonteCarlo { samples: usize },
    /// Exact two-centre volumes when the face is an edge, otherwise Monte Carlo.
    Auto { samples: usize },
}

pub fn region_volume<R: Rng + ?Sized>(region: &RegionSpec, method: VolumeMethod, rng: &mut R) -> Result<(f64, f64)> {
    match method {
        VolumeMethod::Auto { .. } if region.n_centers() == 2 => {
            let sep = dist_sq(region.center(0), region.center(1)).sqrt();
            let v = pair_region_volume(region.flavor, region.conn, region.d, region.r, region.s, sep)?;
            Ok((v, 0.0))
        }
        VolumeMethod::Auto { samples } | VolumeMethod::MonteCarlo { samples } => {
            mc_region_volume(region, samples, rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{lens_volume, theta};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(flavor: Flavor, conn: Conn, centers: &[Vec<f64>], r: f64) -> RegionSpec {
        RegionSpec::new(flavor, conn, centers, r, r).unwrap()
    }

    #[test]
    fn rips_up_midpoint() {
        let r = 0.3;
        let q = spec(Flavor::Rips, Conn::Up, &[vec![0.0, 0.0], vec![2.0 * r, 0.0]], r);
        assert!(region_contains(&q, &[r, 0.0]));
        assert!(!region_contains(&q, &[-2.5 * r, 0.0]));
    }

    #[test]
    fn cech_up_empty_base() {
        let r = 0.2;
        let q = spec(Flavor::Cech, Conn::Up, &[vec![0.0, 0.0], vec![4.0 * r, 0.0]], r);
        for y in [[2.0 * r, 0.0], [0.0, 0.0], [2.0 * r, 0.5 * r]] {
            assert!(!region_contains(&q, &y));
        }
        assert!(bounding_box(&RegionSpec::new(Flavor::Cech, Conn::Up, &[vec![0.0, 0.0], vec![4.0 * r, 0.0]], r, 0.0).unwrap()).is_err());
    }

    /// Raw definition of the Rips/down region: some leave-one-out intersection.
    fn rips_down_brute(centers: &[Vec<f64>], reach: f64, y: &[f64]) -> bool {
        (0..centers.len()).any(|i| {
            centers
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .all(|(_, c)| dist(y, c) <= reach)
        })
    }

    #[test]
    fn rips_down_matches_union_of_intersections() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = 0.5;
        for _ in 0..2000 {
            let centers: Vec<Vec<f64>> = (0..3).map(|_| (0..2).map(|_| rng.random_range(-0.6..0.6)).collect()).collect();
            let q = spec(Flavor::Rips, Conn::Down, &centers, r);
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            assert_eq!(region_contains(&q, &y), rips_down_brute(&centers, 2.0 * r, &y));
        }
        // y within reach of exactly k = 2 of the 3 centres
        let centers = vec![vec![0.0, 0.0], vec![0.8, 0.0], vec![0.4, 0.6]];
        let q = spec(Flavor::Rips, Conn::Down, &centers, r);
        let y = [0.4, -0.9];
        let near = centers.iter().filter(|c| dist(&y, c) <= 1.0).count();
        assert_eq!(near, 2);
        assert!(region_contains(&q, &y));
    }

    #[test]
    fn cech_general_dilation_agrees_with_miniball_at_s_equal_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = 1.0;
        for _ in 0..500 {
            let centers: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| rng.random_range(-0.5..0.5)).collect()).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-2.2..2.2)).collect();
            let fast = spec(Flavor::Cech, Conn::Up, &centers, r);
            let refs: Vec<&[f64]> = centers.iter().map(|c| c.as_slice()).collect();
            let dd = distance_to_ball_intersection(&y, &refs, r).unwrap();
            // skip points within 1e-6 of the boundary: Dykstra stops at 1e-10 per cycle
            if (dd - r).abs() > 1e-6 {
                assert_eq!(region_contains(&fast, &y), dd <= r, "dist {dd}");
            }
        }
    }

    #[test]
    fn dykstra_distance_to_lens() {
        let c0 = [0.0, 0.0];
        let c1 = [1.0, 0.0];
        // nearest lens point to (0.5, 3) is the ridge point (0.5, sqrt(0.75))
        let dd = distance_to_ball_intersection(&[0.5, 3.0], &[&c0, &c1], 1.0).unwrap();
        assert!((dd - (3.0 - 0.75f64.sqrt())).abs() < 1e-8, "{dd}");
        assert!(distance_to_ball_intersection(&[0.5, 0.0], &[&c0, &[3.0, 0.0]], 1.0).is_none());
    }

    #[test]
    fn mc_volumes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2usize, 3] {
            let o = vec![0.0; d];
            let q = spec(Flavor::Rips, Conn::Up, &[o.clone(), o.clone()], 1.0);
            let (v, se) = mc_region_volume(&q, 200_000, &mut rng).unwrap();
            let exact = theta(d) * 2f64.powi(d as i32);
            assert!((v - exact).abs() < 3.0 * se + 1e-12, "d={d} {v} ± {se} vs {exact}");
            let q = spec(Flavor::Cech, Conn::Down, &[o.clone(), o.clone()], 1.0);
            let (v, se) = mc_region_volume(&q, 200_000, &mut rng).unwrap();
            assert!((v - exact).abs() < 3.0 * se + 1e-12);
        }
        let q = spec(Flavor::Rips, Conn::Up, &[vec![0.0, 0.0], vec![2.0, 0.0]], 1.0);
        let (v, se) = mc_region_volume(&q, 400_000, &mut rng).unwrap();
        let lens = lens_volume(2, 2.0, 2.0).unwrap();
        assert!((v - lens).abs() < 3.0 * se, "{v} ± {se}");
        assert!(mc_region_volume(&q, 999, &mut rng).is_err());
    }

    #[test]
    fn auto_volume_uses_exact_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = spec(Flavor::Cech, Conn::Up, &[vec![0.0, 0.0], vec![2.0, 0.0]], 1.0);
        let (v, se) = region_volume(&q, VolumeMethod::Auto { samples: 1000 }, &mut rng).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-9 && se == 0.0);
    }

    #[test]
    fn down_needs_two_centres() {
        assert!(RegionSpec::new(Flavor::Rips, Conn::Down, &[vec![0.0, 0.0]], 1.0, 1.0).is_err());
        assert!(RegionSpec::new(Flavor::Rips, Conn::Up, &[vec![0.0, 0.0]], 0.0, 1.0).is_err());
    }
}
