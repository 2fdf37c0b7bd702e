//! The radius schedule `r_n(c)`, the expectation integral and the implicit constant `c_n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::ConfigurationSample;
use crate::complexes::check_radius;
use crate::error::{Error, Result};
use crate::geometry::{Conn, Flavor, VolumeMethod};

/// Volume samples per configuration when `|Q(O,y)|` has no exact formula.
pub const EXPECTATION_VOLUME_SAMPLES: usize = 4000;

pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `r_n(c) = (L_n / (n c))^{1/d}` with
/// `L_n = log n + k log log n + log|A| + α - k log m - log (k+1)!`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSchedule {
    pub k: usize,
    pub d: usize,
    pub alpha: f64,
    pub a_vol: f64,
    pub m: f64,
    pub c: f64,
}

impl RadiusSchedule {
    /// `L_n`; fails when it is not positive (`n < n_0`).
    pub fn numerator(&self, n: f64) -> Result<f64> {
        if !(n > std::f64::consts::E) {
            return Err(Error::invalid(format!("schedule needs n > e, got {n}")));
        }
        if !(self.a_vol > 0.0 && self.m > 0.0) {
            return Err(Error::invalid("schedule needs |A| > 0 and m > 0"));
        }
        let k = self.k as f64;
        let num = n.ln() + k * n.ln().ln() + self.a_vol.ln() + self.alpha - k * self.m.ln() - ln_factorial(self.k + 1);
        if num > 0.0 {
            Ok(num)
        } else {
            Err(Error::invalid(format!("schedule numerator {num} is not positive at n = {n}")))
        }
    }

    pub fn with_c(self, c: f64) -> Self {
        RadiusSchedule { c, ..self }
    }
}

pub fn r_n_of_c(n: f64, sched: &RadiusSchedule) -> Result<f64> {
    if !(sched.c > 0.0) {
        return Err(Error::invalid(format!("c must be positive, got {}", sched.c)));
    }
    Ok((sched.numerator(n)? / (n * sched.c)).powf(1.0 / sched.d as f64))
}

/// `n (n r^d)^k / (k+1)!`.
fn prefactor(n: f64, r: f64, k: usize, d: usize) -> f64 {
    n * (n * r.powi(d as i32)).powi(k as i32) / ln_factorial(k + 1).exp()
}

/// `E[J] = n (n r^d)^k / (k+1)! · ∫_A exp(-n r^d |Q(O,y)|) dy` on a frozen sample.
pub fn expected_j(n: f64, r: f64, sample: &ConfigurationSample) -> (f64, f64) {
    let pre = prefactor(n, r, sample.k, sample.d);
    let (v, se) = sample.integral(n * r.powi(sample.d as i32));
    (pre * v, pre * se)
}

/// Monte Carlo Campbell-Mecke estimate of `E[J]` from `samples` draws of
/// `B_O(2)^k`; exact pair volumes for `k = 1`, Monte Carlo volumes otherwise.
#[allow(clippy::too_many_arguments)]
pub fn expected_j_mc<R: Rng + ?Sized>(
    n: f64,
    r: f64,
    p: Flavor,
    q: Conn,
    k: usize,
    d: usize,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::invalid("the expectation integral needs k >= 1"));
    }
    check_radius(r)?;
    let method = VolumeMethod::Auto {
        samples: EXPECTATION_VOLUME_SAMPLES,
    };
    let sample = ConfigurationSample::monte_carlo(p, q, k, d, samples, method, rng)?;
    Ok(expected_j(n, r, &sample))
}

/// Solution of `∫_A exp(-n r_n(c)^d |Q|) = |A| exp(-n r_n(c)^d c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnSolution {
    pub n: f64,
    pub c_n: f64,
    /// `|LHS/RHS - 1|` at `c_n`.
    pub residual: f64,
    pub lo: f64,
    pub hi: f64,
    pub r_n: f64,
    /// Whether `m < c_n < M` strictly.
    pub interior: bool,
}

/// Bisection for `c_n` on the frozen sample. With `t = L_n / c` the equation
/// reads `Σ w_i exp(-t V_i) = Â exp(-L_n)`; the left side minus the right is
/// non-positive at `c = m <= min V_i` and non-negative at `c = max V_i`.
pub fn solve_c_n(n: f64, sample: &ConfigurationSample, sched: &RadiusSchedule, big_m: f64) -> Result<CnSolution> {
    if sample.is_empty() {
        return Err(Error::Empty("configuration sample"));
    }
    let l = sched.numerator(n)?;
    let log_rhs = sample.a_volume().ln() - l;
    let g = |c: f64| sample.log_integral(l / c) - log_rhs;
    let lo = sched.m;
    let hi = big_m.max(sample.max_volume());
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a), g(b));
    const SLACK: f64 = 1e-12;
    if ga > SLACK || gb < -SLACK {
        return Err(Error::NoSignChange {
            lo,
            hi,
            res_lo: ga,
            res_hi: gb,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if g(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-14 * b {
            break;
        }
    }
    let c_n = 0.5 * (a + b);
    let residual = g(c_n).exp_m1().abs();
    Ok(CnSolution {
        n,
        c_n,
        residual,
        lo,
        hi,
        r_n: r_n_of_c(n, &sched.with_c(c_n))?,
        interior: c_n > lo && c_n < big_m,
    })
}
