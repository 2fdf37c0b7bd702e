//! Configurations `y ∈ A^p_k` (k-faces with the origin at unit radius) and
//! frozen weighted samples of them for the expectation integral.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::quad::composite_gauss_legendre;
use crate::geometry::{pair_region_volume, region_volume, theta, within, Conn, Flavor, RegionSpec, VolumeMethod};
use crate::geometry::miniball_radius_flat;

/// Acceptance fraction below which sampling `A^p` is declared infeasible.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// Face indicator `h^p(O, y)` at radius 1; `y` holds `k` points row-major.
pub fn is_unit_face(flavor: Flavor, d: usize, y: &[f64]) -> bool {
    let pts = y.chunks_exact(d);
    let norm_ok = pts.clone().all(|p| within(p.iter().map(|c| c * c).sum::<f64>().sqrt(), 2.0));
    if !norm_ok {
        return false;
    }
    let k = y.len() / d;
    for a in 0..k {
        for b in a + 1..k {
            if !within(crate::geometry::dist(&y[a * d..(a + 1) * d], &y[b * d..(b + 1) * d]), 2.0) {
                return false;
            }
        }
    }
    match flavor {
        Flavor::Rips => true,
        Flavor::Cech => {
            let mut all = vec![0.0; d];
            all.extend_from_slice(y);
            within(miniball_radius_flat(&all, d), 1.0)
        }
    }
}

/// Uniform point of the ball `B_O(radius)` in `R^d`.
pub(crate) fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, d: usize, radius: f64, out: &mut [f64]) {
    let mut norm = 0.0;
    for o in out.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *o = g;
        norm += g * g;
    }
    let scale = radius * rng.random::<f64>().powf(1.0 / d as f64) / norm.sqrt();
    out.iter_mut().for_each(|o| *o *= scale);
}

/// Rejection sampler for `A^p_k` from `B_O(2)^k`, tracking acceptance.
#[derive(Clone, Debug)]
pub struct ASampler {
    pub flavor: Flavor,
    pub k: usize,
    pub d: usize,
    pub tried: u64,
    pub accepted: u64,
}

impl ASampler {
    pub fn new(flavor: Flavor, k: usize, d: usize) -> Result<Self> {
        if k == 0 || d < 2 {
            return Err(Error::invalid(format!("need k >= 1 and d >= 2, got k={k} d={d}")));
        }
        Ok(ASampler {
            flavor,
            k,
            d,
            tried: 0,
            accepted: 0,
        })
    }

    pub fn acceptance(&self) -> f64 {
        if self.tried == 0 {
            1.0
        } else {
            self.accepted as f64 / self.tried as f64
        }
    }

    /// One draw from `B_O(2)^k`, with its face indicator.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R, y: &mut Vec<f64>) -> bool {
        y.resize(self.k * self.d, 0.0);
        for p in y.chunks_exact_mut(self.d) {
            uniform_in_ball(rng, self.d, 2.0, p);
        }
        self.tried += 1;
        let ok = is_unit_face(self.flavor, self.d, y);
        self.accepted += ok as u64;
        ok
    }

    /// Draws until acceptance; fails once a million draws have produced an
    /// acceptance fraction below [`MIN_ACCEPTANCE`].
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<f64>> {
        let mut y = Vec::new();
        loop {
            if self.draw(rng, &mut y) {
                return Ok(y);
            }
            if self.tried >= 1_000_000 && self.acceptance() < MIN_ACCEPTANCE {
                return Err(Error::LowAcceptance(self.acceptance()));
            }
        }
    }
}

/// One uniform sample of `A^p_k`.
pub fn sample_a<R: Rng + ?Sized>(flavor: Flavor, k: usize, d: usize, rng: &mut R) -> Result<Vec<f64>> {
    ASampler::new(flavor, k, d)?.sample(rng)
}

/// `|B_O(2)^k| = (2^d θ_d)^k`.
pub fn ball_power_volume(k: usize, d: usize) -> f64 {
    (2f64.powi(d as i32) * theta(d)).powi(k as i32)
}

/// `|A^p_k|` with binomial stderr; exact for `k = 1` where `A = B_O(2)`.
pub fn estimate_a_volume<R: Rng + ?Sized>(flavor: Flavor, k: usize, d: usize, samples: usize, rng: &mut R) -> Result<(f64, f64)> {
    if samples < 10_000 {
        return Err(Error::invalid(format!("need at least 10^4 samples, got {samples}")));
    }
    let mut s = ASampler::new(flavor, k, d)?;
    let total = ball_power_volume(k, d);
    if k == 1 {
        return Ok((total, 0.0));
    }
    let mut y = Vec::new();
    for _ in 0..samples {
        s.draw(rng, &mut y);
    }
    let p = s.acceptance();
    if p < MIN_ACCEPTANCE {
        return Err(Error::LowAcceptance(p));
    }
    Ok((total * p, total * (p * (1.0 - p) / samples as f64).sqrt()))
}

/// Frozen weighted nodes `(w_i, V_i)` with `Σ w_i f(V_i) ≈ ∫_A f(|Q(O,y)|) dy`.
#[derive(Clone, Debug)]
pub struct ConfigurationSample {
    pub flavor: Flavor,
    pub conn: Conn,
    pub k: usize,
    pub d: usize,
    weights: Vec<f64>,
    volumes: Vec<f64>,
    vol_stderr: Vec<f64>,
    /// Monte Carlo draws behind the nodes (rejected ones carry zero weight);
    /// zero for deterministic quadrature.
    pub draws: usize,
}

impl ConfigurationSample {
    /// Deterministic rule for `k = 1`: `A = B_O(2)` and `|Q(O,y)|` depends on
    /// `|y|` only, so the integral is radial. Gauss-Legendre panels are
    /// graded geometrically toward both ends of `[0, 2]`, where the extreme
    /// volumes sit.
    pub fn pair_quadrature(flavor: Flavor, conn: Conn, d: usize) -> Result<Self> {
        const LEVELS: i32 = 30;
        const ORDER: usize = 12;
        let mut cuts: Vec<f64> = (0..=LEVELS).rev().map(|l| 2f64.powi(-l)).collect();
        cuts.insert(0, 0.0);
        let right: Vec<f64> = cuts.iter().rev().skip(1).map(|c| 2.0 - c).collect();
        cuts.extend(right);
        let shell = d as f64 * theta(d);
        let mut weights = Vec::new();
        let mut volumes = Vec::new();
        for w in cuts.windows(2) {
            for (rho, wq) in composite_gauss_legendre(w[0], w[1], 1, ORDER) {
                weights.push(wq * shell * rho.powi(d as i32 - 1));
                volumes.push(pair_region_volume(flavor, conn, d, 1.0, 1.0, rho)?);
            }
        }
        let n = weights.len();
        Ok(ConfigurationSample {
            flavor,
            conn,
            k: 1,
            d,
            weights,
            volumes,
            vol_stderr: vec![0.0; n],
            draws: 0,
        })
    }

    /// `draws` uniform points of `B_O(2)^k`; accepted ones become nodes of
    /// weight `|B_O(2)^k| / draws` with `|Q(O,y)|` from `method`.
    pub fn monte_carlo<R: Rng + ?Sized>(
        flavor: Flavor,
        conn: Conn,
        k: usize,
        d: usize,
        draws: usize,
        method: VolumeMethod,
        rng: &mut R,
    ) -> Result<Self> {
        if draws == 0 {
            return Err(Error::invalid("need at least one draw"));
        }
        let mut s = ASampler::new(flavor, k, d)?;
        let w = ball_power_volume(k, d) / draws as f64;
        let mut y = Vec::new();
        let (mut weights, mut volumes, mut vol_stderr) = (Vec::new(), Vec::new(), Vec::new());
        let mut centers = vec![0.0; d];
        for _ in 0..draws {
            if !s.draw(rng, &mut y) {
                continue;
            }
            centers.truncate(d);
            centers.extend_from_slice(&y);
            let region = RegionSpec::from_flat(flavor, conn, d, centers.clone(), 1.0, 1.0)?;
            let (v, se) = region_volume(&region, method, rng)?;
            weights.push(w);
            volumes.push(v);
            vol_stderr.push(se);
        }
        if s.acceptance() < MIN_ACCEPTANCE {
            return Err(Error::LowAcceptance(s.acceptance()));
        }
        Ok(ConfigurationSample {
            flavor,
            conn,
            k,
            d,
            weights,
            volumes,
            vol_stderr,
            draws,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// `Â = Σ w_i`, the sample's own estimate of `|A|`.
    pub fn a_volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min_volume(&self) -> f64 {
        self.volumes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_volume(&self) -> f64 {
        self.volumes.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `log Σ w_i exp(-t V_i)`, evaluated stably.
    pub fn log_integral(&self, t: f64) -> f64 {
        let top = self
            .weights
            .iter()
            .zip(&self.volumes)
            .map(|(w, v)| w.ln() - t * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self
            .weights
            .iter()
            .zip(&self.volumes)
            .map(|(w, v)| (w.ln() - t * v - top).exp())
            .sum();
        top + s.ln()
    }

    /// `∫_A exp(-t |Q(O,y)|) dy` with a standard error: Monte Carlo spread
    /// over the draws plus the delta-method contribution of noisy volumes.
    pub fn integral(&self, t: f64) -> (f64, f64) {
        let value = self.log_integral(t).exp();
        if self.draws == 0 {
            return (value, 0.0);
        }
        let n = self.draws as f64;
        let total = ball_power_volume(self.k, self.d);
        let mut second = 0.0;
        let mut vol_var = 0.0;
        for ((w, v), se) in self.weights.iter().zip(&self.volumes).zip(&self.vol_stderr) {
            let f = total * (-t * v).exp();
            second += f * f / n;
            vol_var += (w * t * (-t * v).exp() * se).powi(2);
        }
        let var_mean = (second - value * value).max(0.0) / (n - 1.0).max(1.0);
        (value, (var_mean + vol_var).sqrt())
    }
}
