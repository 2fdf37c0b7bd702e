//! Replicated sweeps, goodness of fit, expectation scans and the scaling probe.

mod gof;
mod scan;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gof::{poisson_gof, poisson_gof_counts, poisson_pmf, GofEstimator, GofReport, MIN_GOF_RECORDS};
pub use scan::{
    expectation_scan, scaling_probe, ScalingConfig, ScalingReport, ScalingRow, ScanConfig, ScanRow, DRIFT_WINDOW,
};

use crate::asymptotics::{
    solve_c_n, ConfigurationSample, ConstantsEntry, ConstantsTable, RadiusSchedule, EXPECTATION_VOLUME_SAMPLES,
};
use crate::complexes::{check_radius, MAX_RADIUS};
use crate::error::{Error, Result};
use crate::geometry::{Conn, Flavor, VolumeMethod};
use crate::isolation::{count_record, CountRecord, StarCap, RECORD_HEADER};
use crate::pointprocess::{replicate_rng, sample_replicate};

/// How `c` is chosen in the schedule `r_n(c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CChoice {
    Solved,
    M,
    Explicit(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RadiusRule {
    /// The listed radii at every `n`.
    Fixed { r: Vec<f64> },
    /// `r_n(c)`.
    Schedule { c: CChoice },
    /// `n m r^d = log n + a log log n + w` for each `w` (`a` defaults to `k`).
    Offset {
        w: Vec<f64>,
        #[serde(default)]
        a: Option<f64>,
    },
    /// `n m r^d = (1 + ε) log n` for each `ε`.
    Coarse { eps: Vec<f64> },
}

fn default_cap() -> StarCap {
    StarCap::default()
}

fn default_a_draws() -> usize {
    20_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub p: Flavor,
    pub q: Conn,
    pub k: usize,
    pub d: usize,
    pub n: Vec<f64>,
    pub radius: RadiusRule,
    #[serde(default)]
    pub alpha: f64,
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_cap")]
    pub star_cap: StarCap,
    /// Configuration draws for solving `c_n` when `k >= 2`.
    #[serde(default = "default_a_draws")]
    pub a_draws: usize,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| Error::Parse(format!("sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if self.k == 0 || self.d < 2 {
            return Err(Error::invalid(format!("need k >= 1 and d >= 2, got k={} d={}", self.k, self.d)));
        }
        if self.n.is_empty() || self.n.iter().any(|n| !(*n > 0.0)) {
            return Err(Error::invalid("n list must be non-empty and positive"));
        }
        let empty = match &self.radius {
            RadiusRule::Fixed { r } => r.is_empty(),
            RadiusRule::Offset { w, .. } => w.is_empty(),
            RadiusRule::Coarse { eps } => eps.is_empty(),
            RadiusRule::Schedule { c } => matches!(c, CChoice::Explicit(v) if !(*v > 0.0)),
        };
        if empty {
            return Err(Error::invalid("radius rule has no usable values"));
        }
        Ok(())
    }
}

/// One `(n, radius)` cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub index: usize,
    pub n: f64,
    /// The rule parameter behind the radius, e.g. `w=0.5`.
    pub label: String,
    pub r: Option<f64>,
    pub c: Option<f64>,
    pub skipped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub replicates: usize,
    pub mean_j: Option<f64>,
    pub mean_j_star: Option<f64>,
    pub p_j_zero: Option<f64>,
    pub p_j_star_zero: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub records: Vec<CountRecord>,
    pub cells: Vec<CellSummary>,
}

impl SweepOutcome {
    pub fn all_skipped(&self) -> bool {
        self.cells.iter().all(|c| c.skipped)
    }
}

/// `r` with `n m r^d = target`, or the reason it is unusable.
fn radius_for_target(n: f64, m: f64, d: usize, target: f64) -> std::result::Result<f64, String> {
    if !(target > 0.0) {
        return Err(format!("n m r^d target {target} is not positive"));
    }
    let r = (target / (n * m)).powf(1.0 / d as f64);
    check_radius(r).map(|_| r).map_err(|e| e.to_string())
}

/// Frozen configuration sample for the expectation integral: exact radial
/// quadrature for pairs, Monte Carlo otherwise.
pub fn configuration_sample<R: Rng + ?Sized>(
    p: Flavor,
    q: Conn,
    k: usize,
    d: usize,
    draws: usize,
    rng: &mut R,
) -> Result<ConfigurationSample> {
    if k == 1 {
        ConfigurationSample::pair_quadrature(p, q, d)
    } else {
        let method = VolumeMethod::Auto {
            samples: EXPECTATION_VOLUME_SAMPLES,
        };
        ConfigurationSample::monte_carlo(p, q, k, d, draws, method, rng)
    }
}

pub(crate) fn schedule_for(e: &ConstantsEntry, alpha: f64) -> RadiusSchedule {
    RadiusSchedule {
        k: e.k,
        d: e.d,
        alpha,
        a_vol: e.a_vol.value,
        m: e.m.value,
        c: e.m.value,
    }
}

struct CellPlan {
    n: f64,
    label: String,
    r: std::result::Result<f64, String>,
    c: Option<f64>,
}

fn plan_cells(cfg: &SweepConfig, e: &ConstantsEntry) -> Result<Vec<CellPlan>> {
    let (k, d, m) = (cfg.k as f64, cfg.d, e.m.value);
    let mut solved_sample = None;
    let mut plans = Vec::new();
    for &n in &cfg.n {
        let ln = n.ln();
        match &cfg.radius {
            RadiusRule::Fixed { r } => {
                for &r in r {
                    let r_ok = check_radius(r).map(|_| r).map_err(|e| e.to_string());
                    plans.push(CellPlan { n, label: format!("r={r}"), r: r_ok, c: None });
                }
            }
            RadiusRule::Offset { w, a } => {
                let a = a.unwrap_or(k);
                for &w in w {
                    let target = ln + a * ln.ln() + w;
                    plans.push(CellPlan { n, label: format!("w={w}"), r: radius_for_target(n, m, d, target), c: None });
                }
            }
            RadiusRule::Coarse { eps } => {
                for &eps in eps {
                    let target = (1.0 + eps) * ln;
                    plans.push(CellPlan { n, label: format!("eps={eps}"), r: radius_for_target(n, m, d, target), c: None });
                }
            }
            RadiusRule::Schedule { c } => {
                let sched = schedule_for(e, cfg.alpha);
                let c_val = match c {
                    CChoice::M => Ok(m),
                    CChoice::Explicit(v) => Ok(*v),
                    CChoice::Solved => {
                        if solved_sample.is_none() {
                            let mut rng = replicate_rng(cfg.master_seed, u64::MAX);
                            solved_sample = Some(configuration_sample(cfg.p, cfg.q, cfg.k, d, cfg.a_draws, &mut rng)?);
                        }
                        let sample = solved_sample.as_ref().unwrap();
                        solve_c_n(n, sample, &sched, e.big_m.value).map(|s| s.c_n).map_err(|e| e.to_string())
                    }
                };
                let (r, c_opt) = match c_val {
                    Ok(cv) => {
                        let r = crate::asymptotics::r_n_of_c(n, &sched.with_c(cv))
                            .map_err(|e| e.to_string())
                            .and_then(|r| check_radius(r).map(|_| r).map_err(|e| e.to_string()));
                        (r, Some(cv))
                    }
                    Err(msg) => (Err(msg), None),
                };
                let label = match c {
                    CChoice::Solved => "c=solved".to_string(),
                    CChoice::M => "c=m".to_string(),
                    CChoice::Explicit(v) => format!("c={v}"),
                };
                plans.push(CellPlan { n, label, r, c: c_opt });
            }
        }
    }
    Ok(plans)
}

/// Runs one replicate of a cell; `replicate_id` fixes the random stream.
#[allow(clippy::too_many_arguments)]
pub fn run_replicate(
    p: Flavor,
    q: Conn,
    k: usize,
    d: usize,
    n: f64,
    r: f64,
    cap: StarCap,
    master_seed: u64,
    replicate_id: u64,
) -> Result<CountRecord> {
    let ps = sample_replicate(n, d, master_seed, replicate_id)?;
    Ok(count_record(&ps, r, k, p, q, cap, replicate_id)?.0)
}

fn skipped_record(cfg: &SweepConfig, n: f64, replicate_id: u64) -> CountRecord {
    CountRecord {
        p: cfg.p,
        q: cfg.q,
        k: cfg.k,
        d: cfg.d,
        n,
        r: f64::NAN,
        j: None,
        j_star: None,
        comp_hist: None,
        replicate_id,
        seed: cfg.master_seed,
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (c > 0).then(|| s / c as f64)
}

/// Runs every cell and replicate. Records are written to `cfg.output` (if
/// set) in replicate-id order as each cell completes, with a
/// `<output>.meta.json` sidecar describing the cells.
pub fn run_sweep(cfg: &SweepConfig, table: &ConstantsTable) -> Result<SweepOutcome> {
    cfg.validate()?;
    let entry = table.get(cfg.p, cfg.q, cfg.k, cfg.d)?;
    let plans = plan_cells(cfg, entry)?;
    let mut writer = match &cfg.output {
        Some(path) => {
            let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
            w.write_record(RECORD_HEADER)?;
            Some(w)
        }
        None => None,
    };
    let reps = cfg.replicates as u64;
    let mut records = Vec::with_capacity(plans.len() * cfg.replicates);
    let mut cells = Vec::with_capacity(plans.len());
    for (index, plan) in plans.into_iter().enumerate() {
        let ids = (index as u64 * reps)..(index as u64 + 1) * reps;
        let (cell_records, reason) = match &plan.r {
            Ok(r) => {
                let recs: Result<Vec<CountRecord>> = ids
                    .into_par_iter()
                    .map(|id| run_replicate(cfg.p, cfg.q, cfg.k, cfg.d, plan.n, *r, cfg.star_cap, cfg.master_seed, id))
                    .collect();
                (recs?, None)
            }
            Err(msg) => {
                eprintln!("warning: skipping cell n={} {}: {msg}", plan.n, plan.label);
                (ids.map(|id| skipped_record(cfg, plan.n, id)).collect(), Some(msg.clone()))
            }
        };
        if let Some(w) = writer.as_mut() {
            for rec in &cell_records {
                w.write_record(rec.to_row())?;
            }
            w.flush()?;
        }
        let live = || cell_records.iter().filter(|r| !r.is_skipped());
        cells.push(CellSummary {
            index,
            n: plan.n,
            label: plan.label,
            r: plan.r.as_ref().ok().copied(),
            c: plan.c,
            skipped: reason.is_some(),
            reason,
            replicates: cfg.replicates,
            mean_j: mean(live().map(|r| r.j.unwrap() as f64)),
            mean_j_star: mean(live().map(|r| r.j_star.unwrap() as f64)),
            p_j_zero: mean(live().map(|r| (r.j == Some(0)) as u8 as f64)),
            p_j_star_zero: mean(live().map(|r| (r.j_star == Some(0)) as u8 as f64)),
        });
        records.extend(cell_records);
    }
    if let Some(path) = &cfg.output {
        let meta = serde_json::json!({
            "config": cfg,
            "constants": entry,
            "max_radius": MAX_RADIUS,
            "cells": cells,
        });
        let mut side = path.clone().into_os_string();
        side.push(".meta.json");
        let mut f = File::create(PathBuf::from(side))?;
        f.write_all(serde_json::to_string_pretty(&meta)?.as_bytes())?;
    }
    Ok(SweepOutcome { records, cells })
}
