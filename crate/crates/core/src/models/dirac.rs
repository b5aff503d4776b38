use rand::Rng;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg;

/// Relative tie tolerance for deciding that several atoms are equally near.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// `Σ c_i δ_{μ_i}` with distinct locations.
#[derive(Debug, Clone)]
pub struct DiracMixture {
    dim: usize,
    weights: Vec<f64>,
    atoms: Vec<Vec<f64>>,
    log_weights: Vec<f64>,
}

impl DiracMixture {
    pub fn new(weights: Vec<f64>, atoms: Vec<Vec<f64>>) -> Result<Self> {
        if atoms.is_empty() || weights.len() != atoms.len() {
            return Err(Error::InvalidModel("need one weight per atom and at least one atom".into()));
        }
        let dim = atoms[0].len();
        if dim == 0 || atoms.iter().any(|a| a.len() != dim) {
            return Err(Error::InvalidModel("atoms must share a positive dimension".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidModel("atom weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("weights sum to {total}, not 1")));
        }
        for a in &atoms {
            check_finite(a, "atom").map_err(|_| Error::InvalidModel("non-finite atom".into()))?;
        }
        for i in 0..atoms.len() {
            for j in 0..i {
                if linalg::dist(&atoms[i], &atoms[j]) == 0.0 {
                    return Err(Error::InvalidModel(format!("atoms {j} and {i} coincide")));
                }
            }
        }
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Ok(Self { dim, weights, atoms, log_weights })
    }

    /// A single unit-mass atom.
    pub fn point(location: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0], vec![location])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    fn check(&self, gamma: f64, x: &[f64]) -> Result<()> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma {gamma} must be positive")));
        }
        check_dim(self.dim, x.len())?;
        check_finite(x, "x")
    }

    /// Responsibilities `w_i(x)`, offsets `x − μ_i` and squared distances.
    fn posterior(&self, gamma: f64, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
        let offsets: Vec<Vec<f64>> = self.atoms.iter().map(|m| linalg::sub(x, m)).collect();
        let sq: Vec<f64> = offsets.iter().map(|r| linalg::dot(r, r)).collect();
        let logs: Vec<f64> = self
            .log_weights
            .iter()
            .zip(&sq)
            .map(|(lw, d)| lw - d / (2.0 * gamma))
            .collect();
        (linalg::softmax(&logs), offsets, sq)
    }

    /// `S(p * g_γ)(x) = −Σ w_i (x − μ_i) / γ`.
    pub fn smoothed_score(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check(gamma, x)?;
        let (w, offsets, _) = self.posterior(gamma, x);
        let mut s = vec![0.0; self.dim];
        for (wi, r) in w.iter().zip(&offsets) {
            for k in 0..self.dim {
                s[k] -= wi * r[k];
            }
        }
        Ok(linalg::scale(&s, 1.0 / gamma))
    }

    /// `(γ S, ∂_γ(γ S))`, the two pieces of the extended score.
    fn scaled_score_and_derivative(&self, gamma: f64, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (w, offsets, sq) = self.posterior(gamma, x);
        let mean_sq: f64 = w.iter().zip(&sq).map(|(wi, d)| wi * d).sum();
        let mut gs = vec![0.0; self.dim];
        let mut dgs = vec![0.0; self.dim];
        let denom = 2.0 * gamma * gamma;
        for ((wi, r), d) in w.iter().zip(&offsets).zip(&sq) {
            let c = wi * (d - mean_sq) / denom;
            for k in 0..self.dim {
                gs[k] -= wi * r[k];
                dgs[k] -= c * r[k];
            }
        }
        (gs, dgs)
    }

    /// Score and its derivative with respect to the smoothing variance.
    pub fn score_and_variance_derivative(&self, gamma: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(gamma, x)?;
        let (gs, dgs) = self.scaled_score_and_derivative(gamma, x);
        let s = linalg::scale(&gs, 1.0 / gamma);
        // ∂_γ S = (∂_γ(γS) − S) / γ
        let ds = dgs.iter().zip(&s).map(|(a, b)| (a - b) / gamma).collect();
        Ok((s, ds))
    }

    /// Extended score `H_γ p(x) = γ S + ∂_γ(γ S)` in closed form.
    pub fn h_gamma(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check(gamma, x)?;
        let (gs, dgs) = self.scaled_score_and_derivative(gamma, x);
        Ok(linalg::add(&gs, &dgs))
    }

    /// Indices of the atoms within the tie tolerance of the minimum distance.
    pub fn nearest_set(&self, x: &[f64]) -> Vec<usize> {
        let dists: Vec<f64> = self.atoms.iter().map(|m| linalg::dist(x, m)).collect();
        let min = dists.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = TIE_TOLERANCE * (1.0 + linalg::norm(x));
        (0..dists.len()).filter(|&i| dists[i] - min <= tol).collect()
    }

    /// Limit weights `z_i(x)` of the extended score.
    pub fn voronoi_weights(&self, x: &[f64]) -> Vec<f64> {
        let near = self.nearest_set(x);
        let mut z = vec![0.0; self.atoms.len()];
        if near.len() == 1 {
            z[near[0]] = 1.0;
        } else {
            let mass: f64 = near.iter().map(|&i| self.weights[i]).sum();
            for &i in &near {
                z[i] = self.weights[i] / mass;
            }
        }
        z
    }

    /// `H_0 p(x) = −Σ z_i(x)(x − μ_i)`.
    pub fn h0(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        check_finite(x, "x")?;
        let z = self.voronoi_weights(x);
        let mut h = vec![0.0; self.dim];
        for (zi, m) in z.iter().zip(&self.atoms) {
            if *zi == 0.0 {
                continue;
            }
            for k in 0..self.dim {
                h[k] -= zi * (x[k] - m[k]);
            }
        }
        Ok(h)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (w, a) in self.weights.iter().zip(&self.atoms) {
            acc += w;
            if u < acc {
                return a.clone();
            }
        }
        self.atoms.last().cloned().unwrap_or_default()
    }
}
