use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isolation::CountRecord;

pub const MIN_GOF_RECORDS: usize = 200;

/// Mean of the reference Poisson law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GofEstimator {
    EmpiricalMean,
    /// `e^{-α}`, the limiting mean along the stabilising schedule.
    Target { alpha: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    /// Empirical pmf of `J` on `0..=max J`.
    pub pmf: Vec<f64>,
    pub mean: f64,
    pub poisson_mean: f64,
    pub total_variation: f64,
    /// Sample variance over sample mean; NaN when the mean is zero.
    pub dispersion: f64,
    pub replicates: usize,
}

/// `P(X = j)` for `X ~ Poisson(λ)`, `j = 0..len`.
pub fn poisson_pmf(lambda: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut p = (-lambda).exp();
    for j in 0..len {
        out.push(p);
        p *= lambda / (j + 1) as f64;
    }
    out
}

pub fn poisson_gof_counts(counts: &[u64], estimator: GofEstimator) -> Result<GofReport> {
    if counts.len() < MIN_GOF_RECORDS {
        return Err(Error::TooFewRecords {
            need: MIN_GOF_RECORDS,
            got: counts.len(),
        });
    }
    let n = counts.len() as f64;
    let max = *counts.iter().max().unwrap() as usize;
    let mut pmf = vec![0.0; max + 1];
    for &c in counts {
        pmf[c as usize] += 1.0 / n;
    }
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let lambda = match estimator {
        GofEstimator::EmpiricalMean => mean,
        GofEstimator::Target { alpha } => (-alpha).exp(),
    };
    let reference = poisson_pmf(lambda, max + 1);
    let head: f64 = pmf.iter().zip(&reference).map(|(a, b)| (a - b).abs()).sum();
    // Poisson mass beyond the largest observed count
    let tail = (1.0 - reference.iter().sum::<f64>()).max(0.0);
    Ok(GofReport {
        pmf,
        mean,
        poisson_mean: lambda,
        total_variation: (0.5 * (head + tail)).min(1.0),
        dispersion: if mean > 0.0 { var / mean } else { f64::NAN },
        replicates: counts.len(),
    })
}

/// Goodness of fit of the `J` column of the non-skipped records.
pub fn poisson_gof(records: &[CountRecord], estimator: GofEstimator) -> Result<GofReport> {
    let counts: Vec<u64> = records.iter().filter_map(|r| r.j).collect();
    poisson_gof_counts(&counts, estimator)
}
