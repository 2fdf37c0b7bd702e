//! Geometric constants, radius schedules, the expectation integral and the
//! separation probe.

mod config;
mod optimize;
mod probe;
mod schedule;

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use config::{
    ball_power_volume, estimate_a_volume, is_unit_face, sample_a, ASampler, ConfigurationSample, MIN_ACCEPTANCE,
};
pub use optimize::{nelder_mead, optimize_region_volume, regular_simplex, Budget, Goal, NmResult, OptResult};
pub use probe::{
    degenerate_probe_config, in_probe_domain, probe_separation, probe_separation_nested, separation_volume_crn,
    ProbeResult,
};
pub use schedule::{
    expected_j, expected_j_mc, ln_factorial, r_n_of_c, solve_c_n, CnSolution, RadiusSchedule,
    EXPECTATION_VOLUME_SAMPLES,
};

use crate::error::{Error, Result};
use crate::geometry::{lens_volume, pair_region_volume, theta, Conn, Flavor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Estimated,
}

/// A constant with where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Quantity {
            value,
            provenance: Provenance::ClosedForm,
            stderr: None,
        }
    }

    pub fn estimated(value: f64, stderr: f64) -> Self {
        Quantity {
            value,
            provenance: Provenance::Estimated,
            stderr: Some(stderr),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsEntry {
    pub p: Flavor,
    pub q: Conn,
    pub k: usize,
    pub d: usize,
    pub m: Quantity,
    #[serde(rename = "M")]
    pub big_m: Quantity,
    #[serde(rename = "A_vol")]
    pub a_vol: Quantity,
    /// False when some optimizer run hit its budget without converging.
    pub converged: bool,
}

/// Constants keyed `"p/q/k/d"`, e.g. `"R/U/1/2"`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstantsTable(BTreeMap<String, ConstantsEntry>);

impl ConstantsTable {
    pub fn key(p: Flavor, q: Conn, k: usize, d: usize) -> String {
        format!("{}/{}/{k}/{d}", p.code(), q.code())
    }

    pub fn insert(&mut self, e: ConstantsEntry) {
        self.0.insert(Self::key(e.p, e.q, e.k, e.d), e);
    }

    pub fn get(&self, p: Flavor, q: Conn, k: usize, d: usize) -> Result<&ConstantsEntry> {
        let key = Self::key(p, q, k, d);
        self.0.get(&key).ok_or(Error::MissingConstant(key))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &ConstantsEntry> {
        self.0.values()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let table: ConstantsTable = serde_json::from_str(&text)?;
        for (key, e) in &table.0 {
            if *key != Self::key(e.p, e.q, e.k, e.d) {
                return Err(Error::Parse(format!("constants key {key} does not match its entry")));
            }
            if !(e.m.value > 0.0 && e.m.value <= e.big_m.value) {
                return Err(Error::Parse(format!("constants {key} violate 0 < m <= M")));
            }
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Extreme of the pair volume `|Q(O, y)|` over `|y| ∈ [0, 2]`: a grid scan
/// followed by golden-section refinement around the best grid point.
fn pair_extreme(flavor: Flavor, conn: Conn, d: usize, goal: Goal) -> Result<(f64, f64)> {
    const GRID: usize = 400;
    let sign = if goal == Goal::Maximize { -1.0 } else { 1.0 };
    let f = |t: f64| pair_region_volume(flavor, conn, d, 1.0, 1.0, t).map(|v| sign * v);
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=GRID {
        let v = f(2.0 * i as f64 / GRID as f64)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let step = 2.0 / GRID as f64;
    let (mut a, mut b) = ((best.0 as f64 - 1.0) * step, (best.0 as f64 + 1.0) * step);
    a = a.max(0.0);
    b = b.min(2.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let (c, e) = (b - g * (b - a), a + g * (b - a));
        if f(c)? <= f(e)? {
            b = e;
        } else {
            a = c;
        }
    }
    let mut cands = vec![(best.1, best.0 as f64 * step), (f(0.5 * (a + b))?, 0.5 * (a + b))];
    cands.push((f(0.0)?, 0.0));
    cands.push((f(2.0)?, 2.0));
    let (v, t) = cands.into_iter().min_by(|x, y| x.0.total_cmp(&y.0)).unwrap();
    Ok((sign * v, t))
}

/// `m`, `M` and `|A^p|` for one `(p, q, k, d)`.
///
/// Closed forms: `m(C,U) = θ_d` for every `k`, and for `k = 1` the down
/// minima `2^d θ_d` (coincident points), the Rips/up lens of two radius-2
/// balls at distance 2, and `|A| = 2^d θ_d`. Down minima for `k >= 2` are
/// estimated: they fall below `2^d θ_d`. For `k = 1` the maxima
/// come from a one-dimensional search over exact pair volumes; otherwise
/// from the multi-start optimizer.
pub fn constants<R: Rng + ?Sized>(
    p: Flavor,
    q: Conn,
    k: usize,
    d: usize,
    budget: &Budget,
    rng: &mut R,
) -> Result<ConstantsEntry> {
    if k == 0 || d < 2 {
        return Err(Error::invalid(format!("constants need k >= 1 and d >= 2, got k={k} d={d}")));
    }
    let ball2 = 2f64.powi(d as i32) * theta(d);
    let mut converged = true;
    let mut optimize = |goal: Goal, seeds: &[Vec<f64>], rng: &mut R| -> Result<Quantity> {
        let res = optimize_region_volume(p, q, k, d, goal, budget, seeds, rng)?;
        converged &= res.converged;
        Ok(Quantity::estimated(res.value, res.stderr))
    };
    let m = match (p, q, k) {
        (Flavor::Cech, Conn::Up, _) => Quantity::exact(theta(d)),
        // for a pair both down regions are the union of two radius-2 balls
        (_, Conn::Down, 1) => Quantity::exact(ball2),
        (Flavor::Rips, Conn::Up, 1) => Quantity::exact(lens_volume(d, 2.0, 2.0)?),
        (Flavor::Rips, Conn::Up, _) => {
            let seeds: Vec<Vec<f64>> = regular_simplex(k, d).into_iter().collect();
            optimize(Goal::Minimize, &seeds, rng)?
        }
        // for k >= 2 spreading the points shrinks the leave-one-out
        // intersections, so coincident points are not the minimiser
        (_, Conn::Down, _) => {
            let mut seeds = vec![vec![0.0; k * d]];
            if let Ok(reg) = regular_simplex(k, d) {
                let circum = (2.0 * k as f64 / (k as f64 + 1.0)).sqrt();
                seeds.push(reg.iter().map(|c| c / circum).collect());
                if p == Flavor::Rips {
                    seeds.push(reg);
                }
            }
            optimize(Goal::Minimize, &seeds, rng)?
        }
    };
    let big_m = if k == 1 {
        Quantity::estimated(pair_extreme(p, q, d, Goal::Maximize)?.0, 0.0)
    } else {
        optimize(Goal::Maximize, &[vec![0.0; k * d]], rng)?
    };
    let a_vol = if k == 1 {
        Quantity::exact(ball2)
    } else {
        let (v, se) = estimate_a_volume(p, k, d, budget.a_samples.max(10_000), rng)?;
        Quantity::estimated(v, se)
    };
    // the maximum can only be reported below the minimum through noise
    let big_m = if big_m.value < m.value { Quantity { value: m.value, ..big_m } } else { big_m };
    Ok(ConstantsEntry {
        p,
        q,
        k,
        d,
        m,
        big_m,
        a_vol,
        converged,
    })
}
