//! Smallest enclosing ball by Welzl's recursion.
//!
//! The support set never exceeds `d + 1` points and the circumcentre of a
//! support set is taken inside its affine hull, so the solver works for any
//! point count in any dimension. Inputs here are tiny (a face plus one
//! candidate), so the recursion runs on the input order without shuffling.

use std::cell::RefCell;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Relative slack on squared radii when testing containment during the recursion.
const CONTAIN_REL: f64 = 1e-13;

#[derive(Default)]
pub(crate) struct MiniballSolver {
    support: Vec<usize>,
    gram: Vec<f64>,
    rhs: Vec<f64>,
    diffs: Vec<f64>,
}

impl MiniballSolver {
    /// Squared radius of the smallest ball around `count = pts.len() / d` points;
    /// the centre is written to `center`.
    pub(crate) fn solve(&mut self, pts: &[f64], d: usize, center: &mut [f64]) -> f64 {
        let n = pts.len() / d;
        self.support.clear();
        self.recurse(pts, d, n, center)
    }

    fn recurse(&mut self, pts: &[f64], d: usize, n: usize, center: &mut [f64]) -> f64 {
        if n == 0 || self.support.len() == d + 1 {
            return self.circumball(pts, d, center);
        }
        let r2 = self.recurse(pts, d, n - 1, center);
        let p = &pts[(n - 1) * d..n * d];
        if r2 >= 0.0 && super::dist_sq(p, center) <= r2 * (1.0 + CONTAIN_REL) {
            return r2;
        }
        self.support.push(n - 1);
        let r2 = self.recurse(pts, d, n - 1, center);
        self.support.pop();
        r2
    }

    /// Circumball of the current support set inside its affine hull.
    /// Returns -1 for an empty support (contains nothing).
    fn circumball(&mut self, pts: &[f64], d: usize, center: &mut [f64]) -> f64 {
        let m = self.support.len();
        if m == 0 {
            center.iter_mut().for_each(|c| *c = 0.0);
            return -1.0;
        }
        let p0 = &pts[self.support[0] * d..self.support[0] * d + d];
        center.copy_from_slice(p0);
        if m == 1 {
            return 0.0;
        }
        let q = m - 1;
        self.diffs.clear();
        for &s in &self.support[1..] {
            let p = &pts[s * d..s * d + d];
            self.diffs.extend(p.iter().zip(p0).map(|(a, b)| a - b));
        }
        self.gram.clear();
        self.gram.resize(q * q, 0.0);
        self.rhs.clear();
        self.rhs.resize(q, 0.0);
        for i in 0..q {
            let vi = &self.diffs[i * d..i * d + d];
            for j in 0..=i {
                let vj = &self.diffs[j * d..j * d + d];
                let g: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
                self.gram[i * q + j] = g;
                self.gram[j * q + i] = g;
            }
            self.rhs[i] = 0.5 * self.gram[i * q + i];
        }
        if solve_in_place(&mut self.gram, &mut self.rhs, q) {
            for i in 0..q {
                let lam = self.rhs[i];
                for (c, v) in center.iter_mut().zip(&self.diffs[i * d..i * d + d]) {
                    *c += lam * v;
                }
            }
            super::dist_sq(center, p0)
        } else {
            // affinely dependent support (degenerate input): use the ball of
            // the remaining points, widened to cover the dropped one
            let last = self.support.pop().unwrap();
            let r2 = self.circumball(pts, d, center);
            self.support.push(last);
            self.support
                .iter()
                .map(|&s| super::dist_sq(&pts[s * d..s * d + d], center))
                .fold(r2, f64::max)
        }
    }
}

/// Gaussian elimination with partial pivoting; solution left in `b`.
fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return false;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[piv * n + col].abs() <= 1e-13 * scale {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * b[k];
        }
        b[row] = s / a[row * n + row];
    }
    true
}

thread_local! {
    static SOLVER: RefCell<(MiniballSolver, Vec<f64>)> = RefCell::new(Default::default());
}

/// Radius of the smallest ball containing the points stored row-major in `pts`.
pub(crate) fn miniball_radius_flat(pts: &[f64], d: usize) -> f64 {
    match pts.len() / d {
        1 => return 0.0,
        2 => return 0.5 * super::dist(&pts[..d], &pts[d..]),
        3 => return triangle_radius(&pts[..d], &pts[d..2 * d], &pts[2 * d..]),
        _ => {}
    }
    SOLVER.with(|cell| {
        let (solver, center) = &mut *cell.borrow_mut();
        center.resize(d, 0.0);
        solver.solve(pts, d, center).max(0.0).sqrt()
    })
}

/// Closed form for three points: half the longest side unless the triangle
/// is acute, else the circumradius `abc / (4 area)`.
fn triangle_radius(p0: &[f64], p1: &[f64], p2: &[f64]) -> f64 {
    let a2 = super::dist_sq(p1, p2);
    let b2 = super::dist_sq(p0, p2);
    let c2 = super::dist_sq(p0, p1);
    let long = a2.max(b2).max(c2);
    if 2.0 * long >= a2 + b2 + c2 {
        return 0.5 * long.sqrt();
    }
    let den = 2.0 * (a2 * b2 + b2 * c2 + c2 * a2) - (a2 * a2 + b2 * b2 + c2 * c2);
    (a2 * b2 * c2 / den).sqrt()
}

/// Smallest enclosing ball of a non-empty list of Euclidean points.
pub fn miniball(points: &[Vec<f64>]) -> Result<Ball> {
    let first = points.first().ok_or(Error::Empty("miniball of no points"))?;
    let d = first.len();
    let mut flat = Vec::with_capacity(points.len() * d);
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        flat.extend_from_slice(p);
    }
    let mut center = vec![0.0; d];
    let r2 = MiniballSolver::default().solve(&flat, d, &mut center);
    Ok(Ball {
        center,
        radius: r2.max(0.0).sqrt(),
    })
}

pub fn miniball_radius(points: &[Vec<f64>]) -> Result<f64> {
    miniball(points).map(|b| b.radius)
}
