//! Moment, Kolmogorov–Smirnov and basin checks on sample sets.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg;

pub const MIN_SAMPLES: usize = 100;

/// Two-sided one-sample KS statistic `sup |F_n − F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic critical value `√(−ln(α/2) / 2) / √n`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn normal_cdf(mean: f64, std: f64) -> impl Fn(f64) -> f64 {
    let dist = Normal::new(mean, std).expect("valid normal parameters");
    move |x| dist.cdf(x)
}

/// Independent normal marginals used as the analytic reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalMarginals {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateReport {
    pub mean: f64,
    pub variance: f64,
    pub reference_mean: f64,
    pub reference_variance: f64,
    /// `|mean − reference| / √(reference_variance / n)`.
    pub mean_z: f64,
    pub variance_relative_error: f64,
    pub ks: f64,
    pub ks_critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub count: usize,
    pub alpha: f64,
    pub coordinates: Vec<CoordinateReport>,
}

impl StatReport {
    pub fn ks_pass(&self) -> bool {
        self.coordinates.iter().all(|c| c.ks < c.ks_critical)
    }
}

/// Compares every coordinate of `samples` with its normal reference marginal.
pub fn stat_tests(samples: &[Vec<f64>], reference: &NormalMarginals, alpha: f64) -> Result<StatReport> {
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    let d = reference.mean.len();
    let mut coordinates = Vec::with_capacity(d);
    for k in 0..d {
        let col: Vec<f64> = samples.iter().map(|p| p[k]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let variance = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let (rm, rv) = (reference.mean[k], reference.variance[k]);
        coordinates.push(CoordinateReport {
            mean,
            variance,
            reference_mean: rm,
            reference_variance: rv,
            mean_z: (mean - rm).abs() / (rv / n as f64).sqrt(),
            variance_relative_error: (variance - rv).abs() / rv,
            ks: ks_statistic(&col, normal_cdf(rm, rv.sqrt())),
            ks_critical: ks_critical(n, alpha),
        });
    }
    Ok(StatReport { count: n, alpha, coordinates })
}

/// Index of the unique centre within `radius` of each point, if any.
pub fn assign_basins(points: &[Vec<f64>], centers: &[Vec<f64>], radius: f64) -> Vec<Option<usize>> {
    points
        .iter()
        .map(|p| {
            let mut hits = centers.iter().enumerate().filter(|(_, c)| linalg::dist(p, c) < radius);
            match (hits.next(), hits.next()) {
                (Some((i, _)), None) => Some(i),
                _ => None,
            }
        })
        .collect()
}
