//! Probability-flow inference with `σ(t) = t`.
//!
//! Two update rules share one loop:
//!
//! * standard Euler: `x_{i+1} = x_i + (t_i − t_{i+1}) t_i s_i`
//! * extended score: `x_{i+1} = x_i + m_i (t_i − t_{i+1}) t_i ((1+γ_i) s_i + (bγ_i / 2t_i) s'_i)`
//!
//! where `s_i = S(t_i, x_i)` and `s'_i ≈ ∂_σ S(t_i, x_i)`.

pub mod metrics;
mod schedule;

pub use schedule::{TimeSchedule, DEFAULT_RHO, DEFAULT_SIGMA_MAX, DEFAULT_SIGMA_MIN, DEFAULT_STEPS};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::xscore::{self, DerivativeMode, MadParams, ScoreOracle, StepCoefficients};

/// Iterates whose norm exceeds this multiple of `σ_max` count as diverged.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Method {
    Standard,
    Mad(MadParams),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::Mad(_) => "mad",
        }
    }
}

/// Diagnostics of one update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub t_next: f64,
    pub gamma: Option<f64>,
    pub m: Option<f64>,
    pub score: Vec<f64>,
    pub derivative: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub method: Method,
    pub initial: Vec<f64>,
    pub endpoint: Vec<f64>,
    /// `x_0 … x_N` when history is kept, otherwise empty.
    pub iterates: Vec<Vec<f64>>,
    /// One record per step when history is kept, otherwise empty.
    pub steps: Vec<StepRecord>,
}

/// `x_0 ~ N(0, t_0² I)` from the seeded counter-based generator.
pub fn initial_point(dim: usize, sigma_max: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma_max * z
        })
        .collect()
}

/// A configured inference loop over a shared oracle and schedule.
pub struct Sampler<'a, O: ScoreOracle + ?Sized> {
    oracle: &'a O,
    schedule: &'a TimeSchedule,
    method: Method,
    coefficients: Vec<StepCoefficients>,
    history: bool,
}

impl<'a, O: ScoreOracle + ?Sized> Sampler<'a, O> {
    /// Validates the parameters and precomputes `γ_i`, `m_i` for every step.
    pub fn new(oracle: &'a O, schedule: &'a TimeSchedule, method: Method) -> Result<Self> {
        let mut coefficients = Vec::new();
        if let Method::Mad(params) = &method {
            params.validate()?;
            let t = schedule.times();
            for i in 0..schedule.steps() {
                let c = StepCoefficients::new(params, t[i], t[i + 1]).map_err(|e| match e {
                    Error::CorrectionSingular { gamma, b, t, .. } => {
                        Error::CorrectionSingular { gamma, b, t, step: Some(i) }
                    }
                    other => other,
                })?;
                coefficients.push(c);
            }
        }
        Ok(Self { oracle, schedule, method, coefficients, history: true })
    }

    /// Keep every iterate and step record (default) or only the endpoints.
    pub fn with_history(mut self, keep: bool) -> Self {
        self.history = keep;
        self
    }

    pub fn coefficients(&self) -> &[StepCoefficients] {
        &self.coefficients
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn run(&self, seed: u64) -> Result<Trajectory> {
        let x0 = initial_point(self.oracle.dim(), self.schedule.sigma_max(), seed);
        self.run_from(x0, seed)
    }

    pub fn run_from(&self, x0: Vec<f64>, seed: u64) -> Result<Trajectory> {
        check_dim(self.oracle.dim(), x0.len())?;
        let times = self.schedule.times();
        let n = self.schedule.steps();
        let bound = DIVERGENCE_FACTOR * self.schedule.sigma_max();
        let mut iterates = Vec::new();
        let mut steps = Vec::new();
        if self.history {
            iterates.reserve(n + 1);
            steps.reserve(n);
            iterates.push(x0.clone());
        }
        let mut x = x0.clone();
        for i in 0..n {
            let (t, t_next) = (times[i], times[i + 1]);
            let s = xscore::evaluate(self.oracle, t, &x)?;
            let h = (t - t_next) * t;
            let record = match &self.method {
                Method::Standard => {
                    for (xk, sk) in x.iter_mut().zip(&s) {
                        *xk += h * sk;
                    }
                    StepRecord { t, t_next, gamma: None, m: None, score: s, derivative: None }
                }
                Method::Mad(params) => {
                    let c = self.coefficients[i];
                    let den = 1.0 + c.gamma - params.b * c.gamma / (t * t);
                    let kappa = (1.0 + c.gamma) / den;
                    let derivative = if params.b == 0.0 {
                        None
                    } else {
                        Some(self.sigma_derivative(params, t, &x, &s)?)
                    };
                    match &derivative {
                        None => {
                            for (xk, sk) in x.iter_mut().zip(&s) {
                                *xk += h * (kappa * sk);
                            }
                        }
                        Some(ds) => {
                            let lambda = params.b * c.gamma / (2.0 * t) / den;
                            for ((xk, sk), dk) in x.iter_mut().zip(&s).zip(ds) {
                                *xk += h * (kappa * sk + lambda * dk);
                            }
                        }
                    }
                    StepRecord { t, t_next, gamma: Some(c.gamma), m: Some(c.m), score: s, derivative }
                }
            };
            if x.iter().any(|v| !v.is_finite()) || linalg::norm(&x) > bound {
                return Err(Error::Diverged { step: i });
            }
            if self.history {
                iterates.push(x.clone());
                steps.push(record);
            }
        }
        Ok(Trajectory { seed, method: self.method, initial: x0, endpoint: x, iterates, steps })
    }

    /// Forward difference in σ, switching to a backward difference when the
    /// forward point would leave the oracle's validity range.
    fn sigma_derivative(&self, params: &MadParams, t: f64, x: &[f64], s: &[f64]) -> Result<Vec<f64>> {
        let mode = params.derivative_mode();
        if let DerivativeMode::ForwardDifference { delta } = mode {
            let (_, max) = self.oracle.sigma_range();
            if (1.0 + delta) * t > max {
                let below = xscore::evaluate(self.oracle, (1.0 - delta) * t, x)?;
                let step = delta * t;
                return Ok(s.iter().zip(&below).map(|(a, b)| (a - b) / step).collect());
            }
        }
        xscore::sigma_derivative(self.oracle, t, x, Some(s), mode)
    }

    /// Runs every seed concurrently; results keep the order of `seeds`.
    pub fn run_batch(&self, seeds: &[u64]) -> Vec<Result<Trajectory>> {
        seeds.par_iter().map(|&s| self.run(s)).collect()
    }
}

/// Standard Euler inference from `x_0 ~ N(0, t_0² I)`.
pub fn sample_standard<O: ScoreOracle + ?Sized>(oracle: &O, schedule: &TimeSchedule, seed: u64) -> Result<Trajectory> {
    Sampler::new(oracle, schedule, Method::Standard)?.run(seed)
}

/// Extended-score inference from `x_0 ~ N(0, t_0² I)`.
pub fn sample_mad<O: ScoreOracle + ?Sized>(
    oracle: &O,
    schedule: &TimeSchedule,
    params: MadParams,
    seed: u64,
) -> Result<Trajectory> {
    Sampler::new(oracle, schedule, Method::Mad(params))?.run(seed)
}

/// Endpoints for `seeds`, in order; fails on the first failed trajectory.
pub fn endpoints<O: ScoreOracle + ?Sized>(
    oracle: &O,
    schedule: &TimeSchedule,
    method: Method,
    seeds: &[u64],
) -> Result<Vec<Vec<f64>>> {
    let sampler = Sampler::new(oracle, schedule, method)?.with_history(false);
    sampler.run_batch(seeds).into_iter().map(|r| r.map(|t| t.endpoint)).collect()
}
