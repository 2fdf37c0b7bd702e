//! Numerical probe of the separation between overlapping Rips up-regions.
//!
//! For `1 <= j <= k <= d` a probe configuration is `(x, z)` with
//! `x = (x_2..x_{k+1})` forming a face with the origin and
//! `y = (x_{k-j+2}..x_{k+1}, z_1..z_{k-j+1})` a second face sharing `j`
//! vertices with it. On `D_{j,δ}` all relevant distances are at least
//! `2 - δ`. The probe searches for configurations making
//! `|Q(y) ∖ Q(O,x)|` (Rips/up, unit radius) small; the smallest value found is
//! an upper bound on the true infimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::optimize::regular_simplex;
use crate::error::{Error, Result};
use crate::geometry::{bounding_box, dist, region_contains, within, Conn, Flavor, RegionSpec};

const TOL: f64 = 1e-12;

/// Probe samples per evaluation and for the final estimate.
const CRN_SAMPLES: usize = 20_000;
const REFINE_SAMPLES: usize = 400_000;
const SEARCH_STEPS: usize = 60;
const SPIN_TRIES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub k: usize,
    pub d: usize,
    pub j: usize,
    pub delta: f64,
    /// Fresh-sample estimate of `|Q(y) ∖ Q(O,x)|` at the best configuration.
    pub beta_hat: f64,
    pub stderr: f64,
    /// `beta_hat` exceeds three standard errors.
    pub positive: bool,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

fn check_args(k: usize, d: usize, j: usize) -> Result<()> {
    if !(1 <= j && j <= k && k <= d) {
        return Err(Error::invalid(format!("probe needs 1 <= j <= k <= d, got j={j} k={k} d={d}")));
    }
    Ok(())
}

/// Uniformly random orthogonal `n×n` matrix (Gram-Schmidt on a Gaussian matrix).
fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for b in &q {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            v.iter_mut().zip(b).for_each(|(a, c)| *a -= dot * c);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            q.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    q
}

/// Orthonormal basis of the span of `vs`, extended to all of `R^d`; the first
/// `rank` vectors span `vs`.
fn orthonormal_completion(vs: &[Vec<f64>], d: usize) -> (Vec<Vec<f64>>, usize) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push = |v: &[f64], basis: &mut Vec<Vec<f64>>| {
        let mut w = v.to_vec();
        for b in basis.iter() {
            let dot: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
            w.iter_mut().zip(b).for_each(|(a, c)| *a -= dot * c);
        }
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-9 {
            basis.push(w.into_iter().map(|a| a / norm).collect());
        }
    };
    for v in vs {
        push(v, &mut basis);
    }
    let rank = basis.len();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        push(&e, &mut basis);
    }
    (basis, rank)
}

/// Membership of `(x, z)` in `D_{j,δ}`.
pub fn in_probe_domain(k: usize, d: usize, j: usize, delta: f64, x: &[f64], z: &[f64]) -> bool {
    let lo = (2.0 - delta) * (1.0 - TOL);
    let xs: Vec<&[f64]> = x.chunks_exact(d).collect();
    let zs: Vec<&[f64]> = z.chunks_exact(d).collect();
    if xs.len() != k || zs.len() != k - j + 1 {
        return false;
    }
    let o = vec![0.0; d];
    let ge = |a: &[f64], b: &[f64]| dist(a, b) >= lo;
    let le2 = |a: &[f64], b: &[f64]| within(dist(a, b), 2.0);
    // (O, x) is a face: everything within 2, and all gaps at least 2 - δ
    for (a, xa) in xs.iter().enumerate() {
        if !(ge(xa, &o) && le2(xa, &o)) {
            return false;
        }
        for xb in &xs[a + 1..] {
            if !(ge(xa, xb) && le2(xa, xb)) {
                return false;
            }
        }
    }
    for (a, za) in zs.iter().enumerate() {
        if !ge(za, &o) || !within(dist(za, &o), 6.0) {
            return false;
        }
        if zs[a + 1..].iter().any(|zb| !ge(za, zb)) || xs.iter().any(|xa| !ge(xa, za)) {
            return false;
        }
    }
    // y is a face
    let ys: Vec<&[f64]> = xs[k - j..].iter().chain(&zs).copied().collect();
    (0..ys.len()).all(|a| (a + 1..ys.len()).all(|b| le2(ys[a], ys[b])))
}

/// A `δ = 0` configuration: a rotated regular simplex `(O, x)` and the
/// reflections `z` of its unshared vertices through the affine hull of the
/// shared ones, randomly rotated about that hull (falling back to the plain
/// reflection when no tried rotation keeps every gap at least 2).
pub fn degenerate_probe_config<R: Rng + ?Sized>(k: usize, d: usize, j: usize, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    check_args(k, d, j)?;
    let rot = random_orthogonal(d, rng);
    let apply = |m: &[Vec<f64>], v: &[f64]| -> Vec<f64> { m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect() };
    let base = regular_simplex(k, d)?;
    let x: Vec<f64> = base.chunks_exact(d).flat_map(|v| apply(&rot, v)).collect();
    let xs: Vec<&[f64]> = x.chunks_exact(d).collect();
    let shared: Vec<&[f64]> = xs[k - j..].to_vec();
    let o = vec![0.0; d];
    let unshared: Vec<&[f64]> = std::iter::once(o.as_slice()).chain(xs[..k - j].iter().copied()).collect();

    let p0 = shared[0];
    let dirs: Vec<Vec<f64>> = shared[1..].iter().map(|s| s.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let (basis, rank) = orthonormal_completion(&dirs, d);
    // coordinates relative to p0 in the completed basis; reflection negates the normal part
    let to_local = |v: &[f64]| -> Vec<f64> {
        let w: Vec<f64> = v.iter().zip(p0).map(|(a, b)| a - b).collect();
        basis.iter().map(|b| b.iter().zip(&w).map(|(a, c)| a * c).sum()).collect()
    };
    let from_local = |c: &[f64]| -> Vec<f64> {
        let mut v = p0.to_vec();
        for (b, ci) in basis.iter().zip(c) {
            v.iter_mut().zip(b).for_each(|(a, e)| *a += ci * e);
        }
        v
    };
    let reflect = |c: &mut Vec<f64>| c[rank..].iter_mut().for_each(|a| *a = -*a);
    let z_local: Vec<Vec<f64>> = unshared
        .iter()
        .map(|u| {
            let mut c = to_local(u);
            reflect(&mut c);
            c
        })
        .collect();
    let z: Vec<f64> = z_local.iter().flat_map(|c| from_local(c)).collect();
    if d - rank >= 2 {
        for _ in 0..SPIN_TRIES {
            let spin = random_orthogonal(d - rank, rng);
            let spun: Vec<f64> = z_local
                .iter()
                .flat_map(|c| {
                    let mut c = c.clone();
                    let normal = apply(&spin, &c[rank..]);
                    c[rank..].copy_from_slice(&normal);
                    from_local(&c)
                })
                .collect();
            if in_probe_domain(k, d, j, 1e-9, &x, &spun) {
                return Ok((x, spun));
            }
        }
    }
    Ok((x, z))
}

fn regions(d: usize, j: usize, x: &[f64], z: &[f64]) -> Result<(RegionSpec, RegionSpec)> {
    let k = x.len() / d;
    let mut ox = vec![0.0; d];
    ox.extend_from_slice(x);
    let mut y = x[(k - j) * d..].to_vec();
    y.extend_from_slice(z);
    Ok((
        RegionSpec::from_flat(Flavor::Rips, Conn::Up, d, ox, 1.0, 1.0)?,
        RegionSpec::from_flat(Flavor::Rips, Conn::Up, d, y, 1.0, 1.0)?,
    ))
}

/// `|Q(y) ∖ Q(O,x)|` on frozen unit-cube samples mapped into the box of `Q(y)`.
pub fn separation_volume_crn(d: usize, j: usize, x: &[f64], z: &[f64], unit: &[f64]) -> Result<(f64, f64)> {
    let (qox, qy) = regions(d, j, x, z)?;
    let bx = bounding_box(&qy)?;
    let width: Vec<f64> = bx.lo.iter().zip(&bx.hi).map(|(l, h)| h - l).collect();
    let samples = unit.len() / d;
    let mut p = vec![0.0; d];
    let mut hits = 0usize;
    for u in unit.chunks_exact(d) {
        for i in 0..d {
            p[i] = bx.lo[i] + u[i] * width[i];
        }
        hits += (region_contains(&qy, &p) && !region_contains(&qox, &p)) as usize;
    }
    let frac = hits as f64 / samples as f64;
    let vol = bx.volume();
    Ok((vol * frac, vol * (frac * (1.0 - frac) / samples as f64).sqrt()))
}

fn unit_samples<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<f64> {
    (0..n * d).map(|_| rng.random()).collect()
}

/// Random start in `D_{j,δ}` followed by a shrinking random local search on
/// the frozen samples `unit`. Returns the best `(x, z, value)`.
fn search_one<R: Rng + ?Sized>(
    k: usize,
    d: usize,
    j: usize,
    delta: f64,
    unit: &[f64],
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (x0, z0) = degenerate_probe_config(k, d, j, rng)?;
    let jitter = |v: &[f64], scale: f64, rng: &mut R| -> Vec<f64> {
        v.iter().map(|a| { let e: f64 = StandardNormal.sample(rng); a + scale * e }).collect::<Vec<f64>>()
    };
    let (mut x, mut z) = (x0.clone(), z0.clone());
    if delta > 0.0 {
        for _ in 0..50 {
            let (xt, zt) = (jitter(&x0, delta / 3.0, rng), jitter(&z0, delta / 3.0, rng));
            if in_probe_domain(k, d, j, delta, &xt, &zt) {
                (x, z) = (xt, zt);
                break;
            }
        }
    }
    let mut best = separation_volume_crn(d, j, &x, &z, unit)?.0;
    if delta > 0.0 {
        for step in 0..SEARCH_STEPS {
            let scale = delta * 0.5 * (1.0 - step as f64 / SEARCH_STEPS as f64) + 1e-4;
            let (xt, zt) = (jitter(&x, scale, rng), jitter(&z, scale, rng));
            if !in_probe_domain(k, d, j, delta, &xt, &zt) {
                continue;
            }
            let v = separation_volume_crn(d, j, &xt, &zt, unit)?.0;
            if v < best {
                (x, z, best) = (xt, zt, v);
            }
        }
    }
    Ok((x, z, best))
}

fn finish<R: Rng + ?Sized>(k: usize, d: usize, j: usize, delta: f64, x: Vec<f64>, z: Vec<f64>, rng: &mut R) -> Result<ProbeResult> {
    let fresh = unit_samples(REFINE_SAMPLES, d, rng);
    let (beta_hat, stderr) = separation_volume_crn(d, j, &x, &z, &fresh)?;
    Ok(ProbeResult {
        k,
        d,
        j,
        delta,
        beta_hat,
        stderr,
        positive: beta_hat > 3.0 * stderr,
        x,
        z,
    })
}

/// Smallest `|Q(y) ∖ Q(O,x)|` found over `trials` searches in `D_{j,δ}`.
pub fn probe_separation<R: Rng + ?Sized>(k: usize, d: usize, j: usize, delta: f64, trials: usize, rng: &mut R) -> Result<ProbeResult> {
    check_args(k, d, j)?;
    if !(delta >= 0.0) || trials == 0 {
        return Err(Error::invalid("probe needs delta >= 0 and at least one trial"));
    }
    let unit = unit_samples(CRN_SAMPLES, d, rng);
    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    for _ in 0..trials {
        let cand = search_one(k, d, j, delta, &unit, rng)?;
        if best.as_ref().is_none_or(|b| cand.2 < b.2) {
            best = Some(cand);
        }
    }
    let (x, z, _) = best.expect("at least one trial");
    finish(k, d, j, delta, x, z, rng)
}

/// One shared pool of searched configurations, each trial constrained to a
/// `δ` drawn from `deltas`; for every `δ` the minimum is taken over the pool
/// members lying in `D_{j,δ}`, all on the same frozen samples. Because the
/// domains are nested, the reported minima can only grow as `δ` shrinks.
pub fn probe_separation_nested<R: Rng + ?Sized>(
    k: usize,
    d: usize,
    j: usize,
    deltas: &[f64],
    trials: usize,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    check_args(k, d, j)?;
    if deltas.is_empty() || deltas.iter().any(|d| !(*d >= 0.0)) || trials == 0 {
        return Err(Error::invalid("nested probe needs non-negative deltas and at least one trial"));
    }
    let unit = unit_samples(CRN_SAMPLES, d, rng);
    let seed: u64 = rng.random();
    let mut pool = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut trng = ChaCha8Rng::seed_from_u64(seed);
        trng.set_stream(t as u64);
        let delta = deltas[t % deltas.len()];
        pool.push(search_one(k, d, j, delta, &unit, &mut trng)?);
    }
    Ok(deltas
        .iter()
        .map(|&delta| {
            let m = pool
                .iter()
                .filter(|(x, z, _)| in_probe_domain(k, d, j, delta, x, z))
                .map(|c| c.2)
                .fold(f64::INFINITY, f64::min);
            (delta, m)
        })
        .collect())
}
