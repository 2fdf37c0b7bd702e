use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{configuration_sample, radius_for_target, run_replicate, schedule_for};
use crate::asymptotics::{expected_j, solve_c_n, ConfigurationSample, ConstantsTable};
use crate::error::{Error, Result};
use crate::geometry::{Conn, Flavor};
use crate::isolation::StarCap;

fn default_draws() -> usize {
    20_000
}

fn default_cap() -> StarCap {
    StarCap::default()
}

/// Offsets `w` in `n m r^d = log n + a log log n + w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub p: Flavor,
    pub q: Conn,
    pub k: usize,
    pub d: usize,
    pub n: Vec<f64>,
    pub w: Vec<f64>,
    /// Defaults to `k`; `-1` gives the `log n - log log n` schedule.
    #[serde(default)]
    pub a: Option<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    /// Configuration draws for the expectation integral when `k >= 2`.
    #[serde(default = "default_draws")]
    pub mc_draws: usize,
    #[serde(default = "default_cap")]
    pub star_cap: StarCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: f64,
    pub w: f64,
    pub r: Option<f64>,
    pub skipped: bool,
    pub mean_j: f64,
    pub se_j: f64,
    pub mean_j_star: f64,
    pub se_j_star: f64,
    /// Campbell-Mecke value of `E[J]`.
    pub mc_ej: f64,
    pub mc_se: f64,
    /// Mean number of components with exactly 2 and 3 faces.
    pub mean_l2: f64,
    pub mean_l3: f64,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Empirical and Campbell-Mecke `E[J]` (and `J*`, small components) across `w`.
pub fn expectation_scan(cfg: &ScanConfig, table: &ConstantsTable) -> Result<Vec<ScanRow>> {
    if cfg.replicates == 0 || cfg.n.is_empty() || cfg.w.is_empty() {
        return Err(Error::invalid("scan needs replicates, n values and w values"));
    }
    let e = table.get(cfg.p, cfg.q, cfg.k, cfg.d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    rng.set_stream(u64::MAX);
    let sample: ConfigurationSample = configuration_sample(cfg.p, cfg.q, cfg.k, cfg.d, cfg.mc_draws, &mut rng)?;
    let a = cfg.a.unwrap_or(cfg.k as f64);
    let reps = cfg.replicates as u64;
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &n in &cfg.n {
        for &w in &cfg.w {
            let target = n.ln() + a * n.ln().ln() + w;
            let ids = cell * reps..(cell + 1) * reps;
            cell += 1;
            let Ok(r) = radius_for_target(n, e.m.value, cfg.d, target) else {
                rows.push(ScanRow {
                    n,
                    w,
                    r: None,
                    skipped: true,
                    mean_j: f64::NAN,
                    se_j: f64::NAN,
                    mean_j_star: f64::NAN,
                    se_j_star: f64::NAN,
                    mc_ej: f64::NAN,
                    mc_se: f64::NAN,
                    mean_l2: f64::NAN,
                    mean_l3: f64::NAN,
                });
                continue;
            };
            let recs: Vec<_> = ids
                .into_par_iter()
                .map(|id| run_replicate(cfg.p, cfg.q, cfg.k, cfg.d, n, r, cfg.star_cap, cfg.master_seed, id))
                .collect::<Result<_>>()?;
            let col = |f: &dyn Fn(&crate::isolation::CountRecord) -> f64| recs.iter().map(f).collect::<Vec<f64>>();
            let (mean_j, se_j) = mean_se(&col(&|r| r.j.unwrap() as f64));
            let (mean_j_star, se_j_star) = mean_se(&col(&|r| r.j_star.unwrap() as f64));
            let hist = |l: usize| mean_se(&col(&|r| *r.comp_hist.as_ref().unwrap().get(&l).unwrap_or(&0) as f64)).0;
            let (mc_ej, mc_se) = expected_j(n, r, &sample);
            rows.push(ScanRow {
                n,
                w,
                r: Some(r),
                skipped: false,
                mean_j,
                se_j,
                mean_j_star,
                se_j_star,
                mc_ej,
                mc_se,
                mean_l2: hist(2),
                mean_l3: hist(3),
            });
        }
    }
    Ok(rows)
}

/// Default drift window: a fitted log log n coefficient beyond this in
/// absolute value is flagged.
pub const DRIFT_WINDOW: f64 = 0.5;

fn default_window() -> f64 {
    DRIFT_WINDOW
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub p: Flavor,
    pub q: Conn,
    pub d: usize,
    pub n: Vec<f64>,
    #[serde(default)]
    pub alpha: f64,
    /// Defaults to 2 for Čech/up and 1 otherwise.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default = "default_window")]
    pub window: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: f64,
    pub c_n: f64,
    pub r_n: f64,
    pub residual: f64,
    /// `n r^d m - log n - (1 - a) log log n`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub a: f64,
    pub rows: Vec<ScalingRow>,
    /// Least-squares fit of `value` against `log log n`.
    pub slope: f64,
    pub intercept: f64,
    /// `max - min` of `value` over the rows.
    pub range: f64,
    pub drift: bool,
}

pub fn default_a(p: Flavor, q: Conn) -> f64 {
    if (p, q) == (Flavor::Cech, Conn::Up) {
        2.0
    } else {
        1.0
    }
}

/// Tabulates `n r_n(c_n)^d m - log n - (1 - a) log log n` for `k = 1`.
pub fn scaling_probe(cfg: &ScalingConfig, table: &ConstantsTable) -> Result<ScalingReport> {
    if cfg.n.len() < 2 {
        return Err(Error::invalid("scaling probe needs at least two n values"));
    }
    let e = table.get(cfg.p, cfg.q, 1, cfg.d)?;
    let sample = ConfigurationSample::pair_quadrature(cfg.p, cfg.q, cfg.d)?;
    let sched = schedule_for(e, cfg.alpha);
    let a = cfg.a.unwrap_or_else(|| default_a(cfg.p, cfg.q));
    let m = e.m.value;
    let rows: Vec<ScalingRow> = cfg
        .n
        .iter()
        .map(|&n| {
            let s = solve_c_n(n, &sample, &sched, e.big_m.value)?;
            let value = n * s.r_n.powi(cfg.d as i32) * m - n.ln() - (1.0 - a) * n.ln().ln();
            Ok(ScalingRow {
                n,
                c_n: s.c_n,
                r_n: s.r_n,
                residual: s.residual,
                value,
            })
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.n.ln().ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("scaling probe needs distinct n values"));
    }
    let slope = sxy / sxx;
    let range = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ScalingReport {
        a,
        rows,
        slope,
        intercept: my - slope * mx,
        range,
        drift: slope.abs() > cfg.window,
    })
}
