//! Extremes of `|Q^{p,q}(O, y)|` over `y ∈ A^p_k`.
//!
//! Multi-start Nelder-Mead on Monte Carlo volumes. Every evaluation within a
//! start maps the same unit-cube samples into the region's bounding box, so
//! the objective is a deterministic, nearly continuous function of `y`.
//! Infeasible points (not a face with the origin) evaluate to `+∞`. The best
//! point found is re-estimated with fresh samples to remove the selection bias
//! of minimising a noisy function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{is_unit_face, sample_a};
use crate::error::{Error, Result};
use crate::geometry::{mc_region_volume, mc_region_volume_crn, Conn, Flavor, RegionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

/// Work limits for the optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub starts: usize,
    /// Unit-cube samples shared by all evaluations of one start.
    pub crn_samples: usize,
    /// Objective evaluations per start.
    pub max_evals: usize,
    /// Fresh samples for the final estimate of the best point.
    pub refine_samples: usize,
    /// Draws for estimating `|A|` when it has no closed form.
    pub a_samples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            starts: 32,
            crn_samples: 8_000,
            max_evals: 300,
            refine_samples: 400_000,
            a_samples: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    pub stderr: f64,
    /// The configuration `y` (k points, row-major) attaining `value`.
    pub config: Vec<f64>,
    /// False when no start met the simplex tolerance within its budget.
    pub converged: bool,
}

/// Result of [`nelder_mead`].
#[derive(Clone, Debug)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder-Mead minimisation with the standard coefficients (1, 2, 1/2, 1/2).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], step: f64, max_evals: usize, ftol: f64) -> NmResult {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        pts.push(x);
    }
    let mut vals: Vec<f64> = pts.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;
    let mut converged = false;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let (best, worst) = (vals[0], vals[n]);
        let size = pts[1..].iter().map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if best.is_finite() && worst - best <= ftol * (1.0 + best.abs()) && size < 1e-6_f64.max(step * 1e-4) {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let xr = lerp(&centroid, &pts[n], -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = lerp(&centroid, &pts[n], -2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let outside = fr < vals[n];
            let xc = if outside { lerp(&centroid, &xr, 0.5) } else { lerp(&centroid, &pts[n], 0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    pts[i] = lerp(&pts[0], &pts[i], 0.5);
                    vals[i] = f(&pts[i]);
                }
                evals += n;
            }
        }
    }
    let i = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    NmResult {
        x: pts[i].clone(),
        fx: vals[i],
        evals,
        converged,
    }
}

fn region_of(flavor: Flavor, conn: Conn, d: usize, y: &[f64]) -> Result<RegionSpec> {
    let mut centers = vec![0.0; d];
    centers.extend_from_slice(y);
    RegionSpec::from_flat(flavor, conn, d, centers, 1.0, 1.0)
}

/// `k + 1` points pairwise at distance 2 with the origin as first vertex; the
/// other `k` are returned row-major. Needs `k <= d`.
pub fn regular_simplex(k: usize, d: usize) -> Result<Vec<f64>> {
    if k == 0 || k > d {
        return Err(Error::invalid(format!("a regular k-simplex needs 1 <= k <= d, got k={k} d={d}")));
    }
    let mut verts = vec![vec![0.0; d]];
    for j in 1..=k {
        let mut c = vec![0.0; d];
        for v in &verts {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi / j as f64;
            }
        }
        let r2: f64 = c.iter().map(|x| x * x).sum();
        c[j - 1] = (4.0 - r2).sqrt();
        verts.push(c);
    }
    Ok(verts[1..].concat())
}

/// Extreme of `|Q^{p,q}(O,y)|` over `A^p_k` from `budget.starts` random
/// starts plus any caller-supplied `seeds`.
#[allow(clippy::too_many_arguments)]
pub fn optimize_region_volume<R: Rng + ?Sized>(
    flavor: Flavor,
    conn: Conn,
    k: usize,
    d: usize,
    goal: Goal,
    budget: &Budget,
    seeds: &[Vec<f64>],
    rng: &mut R,
) -> Result<OptResult> {
    if budget.starts + seeds.len() == 0 {
        return Err(Error::invalid("optimizer needs at least one start"));
    }
    let sign = match goal {
        Goal::Minimize => 1.0,
        Goal::Maximize => -1.0,
    };
    let mut starts = seeds.to_vec();
    for _ in 0..budget.starts {
        starts.push(sample_a(flavor, k, d, rng)?);
    }
    let stream_seed: u64 = rng.random();
    let runs: Vec<NmResult> = starts
        .par_iter()
        .enumerate()
        .map(|(i, y0)| {
            let mut srng = ChaCha8Rng::seed_from_u64(stream_seed);
            srng.set_stream(i as u64);
            let unit: Vec<f64> = (0..budget.crn_samples * d).map(|_| srng.random()).collect();
            let objective = |y: &[f64]| {
                if !is_unit_face(flavor, d, y) {
                    return f64::INFINITY;
                }
                match region_of(flavor, conn, d, y).and_then(|reg| mc_region_volume_crn(&reg, &unit)) {
                    Ok((v, _)) => sign * v,
                    Err(_) => f64::INFINITY,
                }
            };
            nelder_mead(objective, y0, 0.25, budget.max_evals, 1e-4)
        })
        .collect();
    let best = runs
        .iter()
        .filter(|s| s.fx.is_finite())
        .min_by(|a, b| a.fx.total_cmp(&b.fx))
        .ok_or_else(|| Error::invalid("no start reached a feasible configuration"))?;
    let (value, stderr) = mc_region_volume(&region_of(flavor, conn, d, &best.x)?, budget.refine_samples.max(1000), rng)?;
    Ok(OptResult {
        value,
        stderr,
        config: best.x.clone(),
        converged: runs.iter().any(|s| s.converged),
    })
}
