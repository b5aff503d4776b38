use rand::Rng;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg;
use crate::models::GaussianMixture;

/// Gaussian on a `d₁`-dimensional affine subspace of `R^{d₁+d₂}`.
///
/// In the canonical frame the density is `N(μ₁, Σ₁) ⊗ δ_0`; an optional
/// rigid transform `x = R y + o` places it in ambient space.
#[derive(Debug, Clone)]
pub struct DegenerateGaussian {
    active_mean: Vec<f64>,
    active_covariance: Vec<f64>,
    degenerate_dim: usize,
    rotation: Option<Vec<f64>>,
    offset: Option<Vec<f64>>,
    active: GaussianMixture,
}

impl DegenerateGaussian {
    pub fn new(
        active_mean: Vec<f64>,
        active_covariance: Vec<f64>,
        degenerate_dim: usize,
        rotation: Option<Vec<f64>>,
        offset: Option<Vec<f64>>,
    ) -> Result<Self> {
        let d1 = active_mean.len();
        if d1 == 0 {
            return Err(Error::InvalidModel("active block must have d₁ ≥ 1".into()));
        }
        let active = GaussianMixture::new(d1, vec![(1.0, active_mean.clone(), active_covariance.clone())])?;
        let d = d1 + degenerate_dim;
        if let Some(r) = &rotation {
            if r.len() != d * d {
                return Err(Error::InvalidModel(format!("rotation must be {d}×{d}")));
            }
            if linalg::orthogonality_defect(r, d) > 1e-10 {
                return Err(Error::InvalidModel("rotation is not orthogonal".into()));
            }
        }
        if let Some(o) = &offset {
            if o.len() != d {
                return Err(Error::InvalidModel(format!("offset must have length {d}")));
            }
        }
        Ok(Self {
            active_mean,
            active_covariance,
            degenerate_dim,
            rotation,
            offset,
            active,
        })
    }

    pub fn dim(&self) -> usize {
        self.active_mean.len() + self.degenerate_dim
    }

    pub fn active_dim(&self) -> usize {
        self.active_mean.len()
    }

    pub fn degenerate_dim(&self) -> usize {
        self.degenerate_dim
    }

    pub fn active_mean(&self) -> &[f64] {
        &self.active_mean
    }

    pub fn active_covariance(&self) -> &[f64] {
        &self.active_covariance
    }

    pub fn rotation(&self) -> Option<&[f64]> {
        self.rotation.as_deref()
    }

    pub fn offset(&self) -> Option<&[f64]> {
        self.offset.as_deref()
    }

    /// Ambient-space mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut y = self.active_mean.clone();
        y.resize(self.dim(), 0.0);
        self.from_canonical_point(&y)
    }

    fn to_canonical(&self, x: &[f64]) -> Vec<f64> {
        let centered = match &self.offset {
            Some(o) => linalg::sub(x, o),
            None => x.to_vec(),
        };
        match &self.rotation {
            Some(r) => linalg::mat_t_vec(r, self.dim(), self.dim(), &centered),
            None => centered,
        }
    }

    fn from_canonical_vector(&self, v: &[f64]) -> Vec<f64> {
        match &self.rotation {
            Some(r) => linalg::mat_vec(r, self.dim(), self.dim(), v),
            None => v.to_vec(),
        }
    }

    fn from_canonical_point(&self, y: &[f64]) -> Vec<f64> {
        let v = self.from_canonical_vector(y);
        match &self.offset {
            Some(o) => linalg::add(&v, o),
            None => v,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        check_finite(x, "x")
    }

    /// `(−Σ₁⁻¹(y₁ − μ₁), −y₂)` in the canonical frame, mapped back.
    pub fn h0(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let y = self.to_canonical(x);
        let d1 = self.active_dim();
        let mut h = self.active.score_at_variance(0.0, &y[..d1])?;
        h.extend(y[d1..].iter().map(|v| -v));
        Ok(self.from_canonical_vector(&h))
    }

    /// Score of the density smoothed with `N(0, u I)`, `u > 0`.
    pub fn score_at_variance(&self, u: f64, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.score_and_variance_derivative(u, x)?.0)
    }

    pub fn score_and_variance_derivative(&self, u: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(x)?;
        if !(u > 0.0) {
            return Err(Error::InvalidParameter(
                "degenerate Gaussian needs positive smoothing variance".into(),
            ));
        }
        let y = self.to_canonical(x);
        let d1 = self.active_dim();
        let (mut s, mut ds) = self.active.score_and_variance_derivative(u, &y[..d1])?;
        for v in &y[d1..] {
            s.push(-v / u);
            ds.push(v / (u * u));
        }
        Ok((self.from_canonical_vector(&s), self.from_canonical_vector(&ds)))
    }

    pub fn h_gamma(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let y = self.to_canonical(x);
        let d1 = self.active_dim();
        let mut h = self.active.h_gamma(gamma, &y[..d1])?;
        h.extend(y[d1..].iter().map(|v| -v));
        Ok(self.from_canonical_vector(&h))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut y = self.active.sample(rng);
        y.resize(self.dim(), 0.0);
        self.from_canonical_point(&y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_h0_substitutions() {
        let g = DegenerateGaussian::new(vec![0.0], vec![1.0], 1, None, None).unwrap();
        assert_eq!(g.h0(&[3.0, 2.0]).unwrap(), vec![-3.0, -2.0]);
        let g = DegenerateGaussian::new(vec![5.0], vec![4.0], 1, None, None).unwrap();
        assert_eq!(g.h0(&[7.0, -1.0]).unwrap(), vec![-0.5, 1.0]);
    }

    #[test]
    fn rotation_equivariance() {
        let canon = DegenerateGaussian::new(vec![5.0], vec![4.0], 1, None, None).unwrap();
        let r = linalg::rotation_2d(std::f64::consts::FRAC_PI_2);
        let rotated = DegenerateGaussian::new(vec![5.0], vec![4.0], 1, Some(r.clone()), None).unwrap();
        let y = [7.0, -1.0];
        let x = linalg::mat_vec(&r, 2, 2, &y);
        let expect = linalg::mat_vec(&r, 2, 2, &canon.h0(&y).unwrap());
        let got = rotated.h0(&x).unwrap();
        for k in 0..2 {
            assert!((got[k] - expect[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_unit_completed_gaussian() {
        // H_0 equals the score of N((μ₁,0), diag(Σ₁, I)).
        let g = DegenerateGaussian::new(vec![1.0, -1.0], vec![2.0, 0.5, 0.5, 1.0], 1, None, None).unwrap();
        let full = GaussianMixture::new(
            3,
            vec![(1.0, vec![1.0, -1.0, 0.0], vec![2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0])],
        )
        .unwrap();
        let x = [0.3, 2.0, -1.7];
        let a = g.h0(&x).unwrap();
        let b = full.score_at_variance(0.0, &x).unwrap();
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_orthogonal_rotation() {
        let bad = vec![1.0, 0.1, 0.0, 1.0];
        assert!(DegenerateGaussian::new(vec![0.0], vec![1.0], 1, Some(bad), None).is_err());
    }

    #[test]
    fn samples_lie_on_the_subspace() {
        use rand::SeedableRng;
        let r = linalg::rotation_2d(0.4);
        let g = DegenerateGaussian::new(vec![2.0], vec![1.0], 1, Some(r.clone()), Some(vec![1.0, 1.0])).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = g.sample(&mut rng);
            let y = linalg::mat_t_vec(&r, 2, 2, &linalg::sub(&x, &[1.0, 1.0]));
            assert!(y[1].abs() < 1e-12);
        }
    }
}
