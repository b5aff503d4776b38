//! Extended-score operators built on top of any score oracle.
//!
//! A network (or analytic model) that approximates `S(σ, x) ≈ ∇ log p_σ(x)`
//! for every noise level also approximates the extended score, because
//! smoothing `p_σ` by a further variance `γ` is the same as moving to noise
//! level `√(σ² + γ)`. The γ-derivative then follows from a σ-derivative by
//! the chain rule.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};

/// Anything that can evaluate `S(σ, x) ≈ ∇ₓ log p_σ(x)`.
///
/// Implementations must be safe to evaluate concurrently.
pub trait ScoreOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// Closed interval of noise levels on which `score` is meaningful.
    /// Noise level zero is never valid.
    fn sigma_range(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn score(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>>;

    /// Exact `∂_σ S(σ, x)` when the oracle can provide it.
    fn sigma_derivative(&self, _sigma: f64, _x: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
}

impl<T: ScoreOracle + ?Sized> ScoreOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sigma_range(&self) -> (f64, f64) {
        (**self).sigma_range()
    }
    fn score(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        (**self).score(sigma, x)
    }
    fn sigma_derivative(&self, sigma: f64, x: &[f64]) -> Option<Result<Vec<f64>>> {
        (**self).sigma_derivative(sigma, x)
    }
}

impl<T: ScoreOracle + ?Sized> ScoreOracle for std::sync::Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sigma_range(&self) -> (f64, f64) {
        (**self).sigma_range()
    }
    fn score(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        (**self).score(sigma, x)
    }
    fn sigma_derivative(&self, sigma: f64, x: &[f64]) -> Option<Result<Vec<f64>>> {
        (**self).sigma_derivative(sigma, x)
    }
}

impl<T: ScoreOracle + ?Sized> ScoreOracle for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sigma_range(&self) -> (f64, f64) {
        (**self).sigma_range()
    }
    fn score(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        (**self).score(sigma, x)
    }
    fn sigma_derivative(&self, sigma: f64, x: &[f64]) -> Option<Result<Vec<f64>>> {
        (**self).sigma_derivative(sigma, x)
    }
}

/// Oracle backed by a closure, handy for tests and one-off experiments.
pub struct FnOracle<F> {
    dim: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> ScoreOracle for FnOracle<F>
where
    F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn score(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(sigma, x))
    }
}

/// Checks `sigma` against the oracle's validity range.
pub fn check_sigma<O: ScoreOracle + ?Sized>(oracle: &O, sigma: f64) -> Result<()> {
    let (min, max) = oracle.sigma_range();
    if !(sigma > 0.0) || sigma < min || sigma > max || !sigma.is_finite() {
        return Err(Error::OutOfRange { sigma, min, max });
    }
    Ok(())
}

/// Evaluates the oracle with range, shape and finiteness checks.
pub fn evaluate<O: ScoreOracle + ?Sized>(oracle: &O, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
    check_sigma(oracle, sigma)?;
    check_dim(oracle.dim(), x.len())?;
    let s = oracle.score(sigma, x)?;
    check_dim(oracle.dim(), s.len())?;
    check_finite(&s, "oracle output")?;
    Ok(s)
}

/// How `∂_σ S` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivative {
    /// `(S((1+δ)σ) − S(σ)) / (δσ)`.
    #[default]
    ForwardDifference,
    /// The oracle's own exact derivative; errors if it has none.
    Analytic,
}

/// Hyperparameters of extended-score inference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MadParams {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    /// Relative step of the forward difference in σ.
    pub delta: f64,
    /// Smallest admissible denominator of the correction factor.
    pub m_guard: f64,
    #[serde(default)]
    pub derivative: Derivative,
}

impl Default for MadParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            p: 1.0,
            delta: 1e-4,
            m_guard: 1e-6,
            derivative: Derivative::ForwardDifference,
        }
    }
}

impl MadParams {
    pub fn new(a: f64, b: f64, p: f64) -> Self {
        Self { a, b, p, ..Self::default() }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_derivative(mut self, derivative: Derivative) -> Self {
        self.derivative = derivative;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParameter(what));
        if !(self.a > 0.0) || !self.a.is_finite() {
            return bad(format!("a = {} must be > 0", self.a));
        }
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return bad(format!("b = {} must be ≥ 0", self.b));
        }
        if !(self.p > 0.0) || !self.p.is_finite() {
            return bad(format!("p = {} must be > 0", self.p));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta = {} must lie in (0, 1)", self.delta));
        }
        if !(self.m_guard > 0.0) {
            return bad(format!("m_guard = {} must be > 0", self.m_guard));
        }
        Ok(())
    }
}

/// Source of the γ-derivative in [`h_gamma`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    ForwardDifference { delta: f64 },
}

impl MadParams {
    pub fn derivative_mode(&self) -> DerivativeMode {
        match self.derivative {
            Derivative::Analytic => DerivativeMode::Analytic,
            Derivative::ForwardDifference => DerivativeMode::ForwardDifference { delta: self.delta },
        }
    }
}

/// `∂_σ S` at `sigma` by the chosen mode.
pub fn sigma_derivative<O: ScoreOracle + ?Sized>(
    oracle: &O,
    sigma: f64,
    x: &[f64],
    base: Option<&[f64]>,
    mode: DerivativeMode,
) -> Result<Vec<f64>> {
    match mode {
        DerivativeMode::Analytic => {
            check_sigma(oracle, sigma)?;
            let d = oracle.sigma_derivative(sigma, x).ok_or(Error::Unsupported {
                kind: "analytic sigma derivative",
                model: "this oracle",
            })??;
            check_finite(&d, "oracle derivative")?;
            Ok(d)
        }
        DerivativeMode::ForwardDifference { delta } => match base {
            Some(s) => forward_difference(oracle, sigma, x, s, delta),
            None => fd_sigma_derivative(oracle, sigma, x, delta),
        },
    }
}

/// Forward-difference estimate `(S((1+δ)t, x) − S(t, x)) / (δt)`.
pub fn fd_sigma_derivative<O: ScoreOracle + ?Sized>(oracle: &O, t: f64, x: &[f64], delta: f64) -> Result<Vec<f64>> {
    let s = evaluate(oracle, t, x)?;
    forward_difference(oracle, t, x, &s, delta)
}

fn forward_difference<O: ScoreOracle + ?Sized>(
    oracle: &O,
    t: f64,
    x: &[f64],
    s: &[f64],
    delta: f64,
) -> Result<Vec<f64>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be > 0")));
    }
    let shifted = evaluate(oracle, (1.0 + delta) * t, x)?;
    let h = delta * t;
    Ok(shifted.iter().zip(s).map(|(a, b)| (a - b) / h).collect())
}

/// `H_γ p_σ(x) = (1+γ) S(√(σ²+γ), x) + γ ∂_γ S(√(σ²+γ), x)`.
pub fn h_gamma<O: ScoreOracle + ?Sized>(
    oracle: &O,
    sigma: f64,
    gamma: f64,
    x: &[f64],
    mode: DerivativeMode,
) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma {gamma} must be positive")));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma {sigma} must be ≥ 0")));
    }
    let eff = (sigma * sigma + gamma).sqrt();
    let s = evaluate(oracle, eff, x)?;
    let ds_dsigma = sigma_derivative(oracle, eff, x, Some(&s), mode)?;
    // ∂_γ = ∂_σ / (2σ_eff)
    let chain = gamma / (2.0 * eff);
    Ok(s.iter()
        .zip(&ds_dsigma)
        .map(|(s, d)| (1.0 + gamma) * s + chain * d)
        .collect())
}

/// Positive root of `a γ^{2/p} + b γ = t²`.
pub fn solve_gamma(params: &MadParams, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
    }
    let MadParams { a, b, p, .. } = *params;
    if !(a > 0.0) || !(b >= 0.0) || !(p > 0.0) {
        return Err(Error::InvalidParameter("need a > 0, b ≥ 0, p > 0".into()));
    }
    let target = t * t;
    let e = 2.0 / p;
    let from_a = (target / a).powf(p / 2.0);
    if b == 0.0 {
        return Ok(from_a);
    }
    let f = |g: f64| a * g.powf(e) + b * g - target;
    let tol = 1e-12 * target;

    // Both terms are nonnegative, so each alone bounds the root from above.
    let mut lo = 0.0;
    let mut hi = from_a.min(target / b);
    // rounding can leave f(hi) an ulp below zero; hi is then the root
    if f(hi) < tol {
        return Ok(hi);
    }
    let mut g = 0.5 * hi;
    for _ in 0..300 {
        let fg = f(g);
        if fg.abs() < tol {
            return Ok(g);
        }
        if fg > 0.0 {
            hi = g;
        } else {
            lo = g;
        }
        let slope = (2.0 * a / p) * g.powf(e - 1.0) + b;
        let newton = g - fg / slope;
        g = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    if f(g).abs() <= tol {
        Ok(g)
    } else {
        Err(Error::InvalidParameter(format!(
            "gamma root for t = {t} did not converge (residual {})",
            f(g)
        )))
    }
}

/// `m = (1 + γ − bγ/t²)⁻¹`, refusing denominators below `m_guard`.
pub fn correction_factor(gamma: f64, b: f64, t: f64, m_guard: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
    }
    let denom = 1.0 + gamma - b * gamma / (t * t);
    if !(denom >= m_guard) {
        return Err(Error::CorrectionSingular { gamma, b, t, step: None });
    }
    Ok(1.0 / denom)
}

/// Per-step MAD coefficients `γ_i`, `m_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepCoefficients {
    pub gamma: f64,
    pub m: f64,
    pub t: f64,
    pub t_next: f64,
}

impl StepCoefficients {
    pub fn new(params: &MadParams, t: f64, t_next: f64) -> Result<Self> {
        let gamma = solve_gamma(params, t)?;
        let m = correction_factor(gamma, params.b, t, params.m_guard)?;
        Ok(Self { gamma, m, t, t_next })
    }
}
