use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg::{self, Cholesky};

const WEIGHT_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Row-major `d × d`.
    pub covariance: Vec<f64>,
    isotropic: Option<f64>,
}

impl GaussianComponent {
    pub fn isotropic_variance(&self) -> Option<f64> {
        self.isotropic
    }
}

/// Finite mixture of positive definite Gaussians.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    dim: usize,
    components: Vec<GaussianComponent>,
    log_weights: Vec<f64>,
}

/// Per-component quantities at a given added isotropic variance.
struct Evaluated {
    log_resp: f64,
    /// `(Σ + uI)⁻¹ (x − μ)`
    y: Vec<f64>,
    /// `(Σ + uI)⁻² (x − μ)`, only when derivatives are requested
    yy: Vec<f64>,
    /// `∂ log_resp / ∂u`
    dlog: f64,
}

impl GaussianMixture {
    /// Builds a mixture from `(weight, mean, covariance)` triples.
    pub fn new(dim: usize, components: Vec<(f64, Vec<f64>, Vec<f64>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if components.is_empty() {
            return Err(Error::InvalidModel("mixture needs at least one component".into()));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidModel(format!("weights sum to {total}, not 1")));
        }
        let mut out = Vec::with_capacity(components.len());
        for (i, (weight, mean, covariance)) in components.into_iter().enumerate() {
            if !(weight > 0.0) {
                return Err(Error::InvalidModel(format!("component {i}: weight must be positive")));
            }
            if mean.len() != dim || covariance.len() != dim * dim {
                return Err(Error::InvalidModel(format!("component {i}: shape does not match dim {dim}")));
            }
            check_finite(&mean, "mean").map_err(|_| Error::InvalidModel(format!("component {i}: non-finite mean")))?;
            if linalg::max_asymmetry(&covariance, dim) > SYMMETRY_TOL {
                return Err(Error::InvalidModel(format!("component {i}: covariance not symmetric")));
            }
            if Cholesky::new(&covariance, dim).is_none() {
                return Err(Error::InvalidModel(format!(
                    "component {i}: covariance not positive definite"
                )));
            }
            let isotropic = detect_isotropic(&covariance, dim);
            out.push(GaussianComponent { weight, mean, covariance, isotropic });
        }
        let log_weights = out.iter().map(|c| c.weight.ln()).collect();
        Ok(Self { dim, components: out, log_weights })
    }

    /// Mixture of isotropic components `N(μ_i, v_i I)`.
    pub fn isotropic(weights: &[f64], means: &[Vec<f64>], variances: &[f64]) -> Result<Self> {
        let dim = means.first().map(Vec::len).unwrap_or(0);
        let comps = weights
            .iter()
            .zip(means)
            .zip(variances)
            .map(|((&w, m), &v)| {
                let mut cov = vec![0.0; dim * dim];
                for k in 0..dim {
                    cov[k * dim + k] = v;
                }
                (w, m.clone(), cov)
            })
            .collect();
        Self::new(dim, comps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// The same mixture convolved with `N(0, var·I)`.
    pub fn smoothed(&self, var: f64) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .map(|c| {
                let mut cov = c.covariance.clone();
                for k in 0..self.dim {
                    cov[k * self.dim + k] += var;
                }
                (c.weight, c.mean.clone(), cov)
            })
            .collect();
        Self::new(self.dim, comps)
    }

    fn evaluate(&self, u: f64, x: &[f64], derivative: bool) -> Result<Vec<Evaluated>> {
        let d = self.dim;
        let mut out = Vec::with_capacity(self.components.len());
        for (c, lw) in self.components.iter().zip(&self.log_weights) {
            let r = linalg::sub(x, &c.mean);
            let e = match c.isotropic {
                Some(v) => {
                    let s = v + u;
                    let y = linalg::scale(&r, 1.0 / s);
                    let quad = linalg::dot(&r, &y);
                    let log_resp = lw - 0.5 * d as f64 * s.ln() - 0.5 * quad;
                    let (yy, dlog) = if derivative {
                        let yy = linalg::scale(&y, 1.0 / s);
                        let dlog = -0.5 * d as f64 / s + 0.5 * linalg::dot(&y, &y);
                        (yy, dlog)
                    } else {
                        (Vec::new(), 0.0)
                    };
                    Evaluated { log_resp, y, yy, dlog }
                }
                None => {
                    let mut cov = c.covariance.clone();
                    for k in 0..d {
                        cov[k * d + k] += u;
                    }
                    let ch = Cholesky::new(&cov, d).ok_or(if u == 0.0 {
                        Error::DegenerateAtSigmaZero
                    } else {
                        Error::NonFinite("smoothed covariance")
                    })?;
                    let y = ch.solve(&r);
                    let log_resp = lw - 0.5 * ch.log_det() - 0.5 * linalg::dot(&r, &y);
                    let (yy, dlog) = if derivative {
                        let yy = ch.solve(&y);
                        let dlog = -0.5 * ch.inverse_trace() + 0.5 * linalg::dot(&y, &y);
                        (yy, dlog)
                    } else {
                        (Vec::new(), 0.0)
                    };
                    Evaluated { log_resp, y, yy, dlog }
                }
            };
            out.push(e);
        }
        Ok(out)
    }

    fn validate_input(&self, var: f64, x: &[f64]) -> Result<()> {
        check_dim(self.dim, x.len())?;
        check_finite(x, "x")?;
        if !(var >= 0.0) || !var.is_finite() {
            return Err(Error::InvalidParameter(format!("noise variance {var} must be ≥ 0")));
        }
        Ok(())
    }

    /// `∇ log (p * g_{σ²})(x)`.
    pub fn smoothed_score(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.score_at_variance(sigma * sigma, x)
    }

    /// Score of the mixture smoothed by an added variance `u`.
    pub fn score_at_variance(&self, u: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.validate_input(u, x)?;
        let evals = self.evaluate(u, x, false)?;
        let logs: Vec<f64> = evals.iter().map(|e| e.log_resp).collect();
        let w = linalg::softmax(&logs);
        let mut s = vec![0.0; self.dim];
        for (wi, e) in w.iter().zip(&evals) {
            for k in 0..self.dim {
                s[k] -= wi * e.y[k];
            }
        }
        Ok(s)
    }

    /// Score and its derivative with respect to the added variance `u`.
    pub fn score_and_variance_derivative(&self, u: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate_input(u, x)?;
        let evals = self.evaluate(u, x, true)?;
        let logs: Vec<f64> = evals.iter().map(|e| e.log_resp).collect();
        let w = linalg::softmax(&logs);
        let mean_dlog: f64 = w.iter().zip(&evals).map(|(wi, e)| wi * e.dlog).sum();
        let mut s = vec![0.0; self.dim];
        let mut ds = vec![0.0; self.dim];
        for (wi, e) in w.iter().zip(&evals) {
            let dw = wi * (e.dlog - mean_dlog);
            for k in 0..self.dim {
                s[k] -= wi * e.y[k];
                // d/du of (Σ+uI)⁻¹ r is −(Σ+uI)⁻² r
                ds[k] -= dw * e.y[k] - wi * e.yy[k];
            }
        }
        Ok((s, ds))
    }

    /// Closed-form extended score `(1+γ)S(p*g_γ) + γ ∂_γ S(p*g_γ)`.
    pub fn h_gamma(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma {gamma} must be positive")));
        }
        let (s, ds) = self.score_and_variance_derivative(gamma, x)?;
        Ok(s.iter().zip(&ds).map(|(s, d)| (1.0 + gamma) * s + gamma * d).collect())
    }

    /// Posterior component probabilities at `x` under the unsmoothed mixture.
    pub fn responsibilities(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.validate_input(0.0, x)?;
        let evals = self.evaluate(0.0, x, false)?;
        let logs: Vec<f64> = evals.iter().map(|e| e.log_resp).collect();
        Ok(linalg::softmax(&logs))
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.validate_input(0.0, x)?;
        let evals = self.evaluate(0.0, x, false)?;
        let logs: Vec<f64> = evals.iter().map(|e| e.log_resp).collect();
        let norm = -0.5 * self.dim as f64 * (2.0 * std::f64::consts::PI).ln();
        Ok(norm + linalg::log_sum_exp(&logs))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut idx = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                idx = i;
                break;
            }
        }
        self.sample_component(idx, rng)
    }

    pub fn sample_component<R: Rng + ?Sized>(&self, idx: usize, rng: &mut R) -> Vec<f64> {
        let c = &self.components[idx];
        let z: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
        let ch = Cholesky::new(&c.covariance, self.dim).expect("validated at construction");
        linalg::add(&c.mean, &ch.lower_mul(&z))
    }
}

fn detect_isotropic(cov: &[f64], dim: usize) -> Option<f64> {
    let v = cov[0];
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { v } else { 0.0 };
            if cov[i * dim + j] != target {
                return None;
            }
        }
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_line() -> GaussianMixture {
        let v = [0.2, 0.5, 1.0, 2.0, 4.0];
        let mu = [-20.0, -10.0, 0.0, 10.0, 20.0];
        GaussianMixture::isotropic(
            &[0.2; 5],
            &mu.iter().map(|&m| vec![m]).collect::<Vec<_>>(),
            &v,
        )
        .unwrap()
    }

    #[test]
    fn standard_normal_score_at_sigma_one() {
        let gm = GaussianMixture::isotropic(&[1.0], &[vec![0.0, 0.0]], &[1.0]).unwrap();
        let s = gm.smoothed_score(1.0, &[2.0, 0.0]).unwrap();
        assert_eq!(s, vec![-1.0, 0.0]);
    }

    #[test]
    fn symmetric_pair_has_zero_score_at_midpoint() {
        let cov = vec![1.0, 0.3, 0.3, 0.8];
        let gm = GaussianMixture::new(
            2,
            vec![(0.5, vec![-1.0, 2.0], cov.clone()), (0.5, vec![3.0, 0.0], cov)],
        )
        .unwrap();
        let s = gm.smoothed_score(0.7, &[1.0, 1.0]).unwrap();
        assert!(linalg::norm(&s) < 1e-14, "{s:?}");
    }

    #[test]
    fn full_and_isotropic_paths_agree() {
        let iso = GaussianMixture::isotropic(
            &[0.4, 0.6],
            &[vec![0.0, 1.0], vec![2.0, -1.0]],
            &[0.5, 2.0],
        )
        .unwrap();
        // tiny off-diagonal forces the Cholesky path
        let full = GaussianMixture::new(
            2,
            vec![
                (0.4, vec![0.0, 1.0], vec![0.5, 1e-300, 1e-300, 0.5]),
                (0.6, vec![2.0, -1.0], vec![2.0, 1e-300, 1e-300, 2.0]),
            ],
        )
        .unwrap();
        assert!(full.components()[0].isotropic_variance().is_none());
        for x in [[0.3, 0.2], [5.0, -3.0], [-2.0, 4.0]] {
            let (a, da) = iso.score_and_variance_derivative(0.3, &x).unwrap();
            let (b, db) = full.score_and_variance_derivative(0.3, &x).unwrap();
            for k in 0..2 {
                assert!((a[k] - b[k]).abs() < 1e-13);
                assert!((da[k] - db[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn variance_derivative_matches_central_difference() {
        let gm = GaussianMixture::new(
            2,
            vec![
                (0.3, vec![0.0, 0.0], vec![1.0, 0.4, 0.4, 0.6]),
                (0.7, vec![1.5, 1.0], vec![0.3, -0.1, -0.1, 0.9]),
            ],
        )
        .unwrap();
        let x = [0.8, 0.2];
        let u = 0.25;
        let h = 1e-5;
        let (_, ds) = gm.score_and_variance_derivative(u, &x).unwrap();
        let p = gm.score_at_variance(u + h, &x).unwrap();
        let m = gm.score_at_variance(u - h, &x).unwrap();
        for k in 0..2 {
            let fd = (p[k] - m[k]) / (2.0 * h);
            assert!((fd - ds[k]).abs() < 1e-7 * (1.0 + fd.abs()), "{fd} vs {}", ds[k]);
        }
    }

    #[test]
    fn smoothing_composes_additively() {
        let gm = fig1_line();
        let twice = gm.smoothed(0.3 * 0.3).unwrap();
        for x in [-20.5, -3.0, 0.1, 14.0] {
            let a = twice.smoothed_score(0.4, &[x]).unwrap()[0];
            let b = gm.smoothed_score((0.09f64 + 0.16).sqrt(), &[x]).unwrap()[0];
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_construction() {
        let bad_weight = GaussianMixture::isotropic(&[0.5, 0.4], &[vec![0.0], vec![1.0]], &[1.0, 1.0]);
        assert!(matches!(bad_weight, Err(Error::InvalidModel(_))));
        let singular = GaussianMixture::new(2, vec![(1.0, vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0])]);
        assert!(matches!(singular, Err(Error::InvalidModel(_))));
        let asym = GaussianMixture::new(2, vec![(1.0, vec![0.0, 0.0], vec![1.0, 0.1, 0.0, 1.0])]);
        assert!(asym.is_err());
    }

    #[test]
    fn rejects_non_finite_input() {
        let gm = fig1_line();
        assert!(matches!(gm.smoothed_score(0.5, &[f64::NAN]), Err(Error::NonFinite(_))));
        assert!(gm.smoothed_score(0.5, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn tiny_sigma_far_from_everything_stays_finite() {
        let gm = fig1_line();
        let s = gm.smoothed_score(1e-3, &[1000.0]).unwrap();
        assert!(s[0].is_finite());
        // dominated by the v=4 component at 20
        assert!((s[0] + (1000.0 - 20.0) / (4.0 + 1e-6)).abs() < 1e-6);
    }
}
