//! Cell lists on the torus.
//!
//! The unit cube is cut into `g^d` cubical cells of side `1/g >= cell_radius`.
//! Points are stored bucket-contiguously (CSR layout) together with a copy of
//! their coordinates so a query touches memory cell by cell.

use std::ops::ControlFlow;

use super::PointSet;
use crate::error::{Error, Result};
use crate::geometry::{torus_dist_unchecked, TIE_REL};

#[derive(Clone, Debug)]
pub struct GridIndex {
    d: usize,
    g: usize,
    cell_size: f64,
    support: f64,
    /// `starts[c]..starts[c+1]` indexes the bucket of linear cell `c`.
    starts: Vec<u32>,
    ids: Vec<u32>,
    pts: Vec<f64>,
    /// Offsets in `[-R, R]^d` ordered by Chebyshev ring, `R` = largest ring the support needs.
    offsets: Vec<i32>,
    ring_ends: Vec<usize>,
}

/// Index whose cells have side at least `radius`; queries up to `radius`.
pub fn build_index(ps: &PointSet, radius: f64) -> Result<GridIndex> {
    build_index_with_support(ps, radius, radius)
}

/// Index with cell side at least `cell_radius` answering queries of radius up
/// to `support` (larger queries scan several rings of cells, or every point
/// once the rings would wrap).
pub fn build_index_with_support(ps: &PointSet, cell_radius: f64, support: f64) -> Result<GridIndex> {
    if !(cell_radius > 0.0 && cell_radius < 0.125) {
        return Err(Error::invalid(format!("index radius must lie in (0, 1/8), got {cell_radius}")));
    }
    if !(support >= cell_radius) || !support.is_finite() {
        return Err(Error::invalid(format!("support {support} below cell radius {cell_radius}")));
    }
    let d = ps.dim();
    let n = ps.len();
    let g_max = ((2 * n + 64) as f64).powf(1.0 / d as f64).floor().max(1.0) as usize;
    let g = ((1.0 / cell_radius).floor() as usize).clamp(1, g_max);
    let n_cells = g.pow(d as u32);

    let cell_of: Vec<usize> = (0..n).map(|i| linear_cell(ps.point(i), g)).collect();
    let mut starts = vec![0u32; n_cells + 1];
    for &c in &cell_of {
        starts[c + 1] += 1;
    }
    for c in 0..n_cells {
        starts[c + 1] += starts[c];
    }
    let mut fill = starts.clone();
    let mut ids = vec![0u32; n];
    let mut pts = vec![0.0; n * d];
    for (i, &c) in cell_of.iter().enumerate() {
        let slot = fill[c] as usize;
        fill[c] += 1;
        ids[slot] = i as u32;
        pts[slot * d..(slot + 1) * d].copy_from_slice(ps.point(i));
    }

    let max_rings = rings_for(support, g);
    let (offsets, ring_ends) = if 2 * max_rings + 1 >= g {
        (Vec::new(), Vec::new())
    } else {
        ring_offsets(d, max_rings)
    };
    Ok(GridIndex {
        d,
        g,
        cell_size: 1.0 / g as f64,
        support,
        starts,
        ids,
        pts,
        offsets,
        ring_ends,
    })
}

fn rings_for(radius: f64, g: usize) -> usize {
    (radius * (1.0 + TIE_REL) * g as f64).ceil() as usize
}

fn cell_coord(x: f64, g: usize) -> usize {
    ((x * g as f64) as usize).min(g - 1)
}

fn linear_cell(p: &[f64], g: usize) -> usize {
    p.iter().rev().fold(0, |acc, &x| acc * g + cell_coord(x, g))
}

/// All offsets of `[-rings, rings]^d`, stably sorted by Chebyshev norm, with
/// the end index of each ring.
fn ring_offsets(d: usize, rings: usize) -> (Vec<i32>, Vec<usize>) {
    let side = 2 * rings + 1;
    let mut all: Vec<Vec<i32>> = (0..side.pow(d as u32))
        .map(|mut m| {
            (0..d)
                .map(|_| {
                    let o = (m % side) as i32 - rings as i32;
                    m /= side;
                    o
                })
                .collect()
        })
        .collect();
    all.sort_by_key(|o| o.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0));
    let mut ends = vec![0usize; rings + 1];
    for o in &all {
        let ring = o.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as usize;
        ends[ring] += 1;
    }
    for r in 1..=rings {
        ends[r] += ends[r - 1];
    }
    (all.concat(), ends)
}

impl GridIndex {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cells_per_axis(&self) -> usize {
        self.g
    }

    /// Largest query radius this index accepts.
    pub fn support(&self) -> f64 {
        self.support
    }

    fn check(&self, center: &[f64], radius: f64) -> Result<()> {
        if center.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: center.len(),
            });
        }
        if !(radius >= 0.0) || radius > self.support * (1.0 + TIE_REL) {
            return Err(Error::invalid(format!(
                "query radius {radius} exceeds index support {}",
                self.support
            )));
        }
        Ok(())
    }

    /// Ids within closed torus distance `radius` of `center`, ascending.
    pub fn range_query(&self, center: &[f64], radius: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_near(center, radius, |id, _| {
            out.push(id);
            ControlFlow::<()>::Continue(())
        })?;
        out.sort_unstable();
        Ok(out)
    }

    /// Calls `f(id, coords)` for every point within `radius` of `center`,
    /// nearer cells first, until `f` breaks. Returns the break value if any.
    pub fn for_each_near<B, F>(&self, center: &[f64], radius: f64, mut f: F) -> Result<Option<B>>
    where
        F: FnMut(usize, &[f64]) -> ControlFlow<B>,
    {
        self.check(center, radius)?;
        let reach = radius * (1.0 + TIE_REL) + f64::MIN_POSITIVE;
        let d = self.d;
        let mut visit = |slot: usize| -> ControlFlow<B> {
            let p = &self.pts[slot * d..(slot + 1) * d];
            if torus_dist_unchecked(center, p) <= reach {
                f(self.ids[slot] as usize, p)
            } else {
                ControlFlow::Continue(())
            }
        };
        let rings = rings_for(radius, self.g);
        if self.offsets.is_empty() || 2 * rings + 1 >= self.g {
            for slot in 0..self.ids.len() {
                if let ControlFlow::Break(b) = visit(slot) {
                    return Ok(Some(b));
                }
            }
            return Ok(None);
        }
        let g = self.g as i64;
        let n_off = self.ring_ends[rings];
        for off in self.offsets[..n_off * d].chunks_exact(d) {
            let mut c = 0usize;
            for i in (0..d).rev() {
                let base = cell_coord(center[i], self.g) as i64;
                c = c * self.g + (base + off[i] as i64).rem_euclid(g) as usize;
            }
            for slot in self.starts[c] as usize..self.starts[c + 1] as usize {
                if let ControlFlow::Break(b) = visit(slot) {
                    return Ok(Some(b));
                }
            }
        }
        Ok(None)
    }
}
