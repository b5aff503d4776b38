use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::GaussianMixture;

pub const DEFAULT_QUADRATURE_POINTS: usize = 256;

/// `p(x) ∝ Σ_i exp(−(‖x − μ_i‖ − r)² / 2v)` in the plane.
///
/// Scores are evaluated on a discretization: every ring becomes
/// `N_θ` equally weighted isotropic Gaussians of variance `v` spaced evenly
/// around the circle.
#[derive(Debug, Clone)]
pub struct RadialGaussianMixture {
    centers: Vec<Vec<f64>>,
    radius: f64,
    variance: f64,
    quadrature_points: usize,
    mixture: GaussianMixture,
}

impl RadialGaussianMixture {
    pub fn new(centers: Vec<Vec<f64>>, radius: f64, variance: f64, quadrature_points: usize) -> Result<Self> {
        if centers.is_empty() || centers.iter().any(|c| c.len() != 2) {
            return Err(Error::InvalidModel("radial mixture needs planar centers".into()));
        }
        if !(radius > 0.0) || !(variance > 0.0) {
            return Err(Error::InvalidModel("radius and variance must be positive".into()));
        }
        if quadrature_points < 16 {
            return Err(Error::InvalidModel("need at least 16 quadrature points".into()));
        }
        let mixture = discretize(&centers, radius, variance, quadrature_points)?;
        Ok(Self { centers, radius, variance, quadrature_points, mixture })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    pub fn as_mixture(&self) -> &GaussianMixture {
        &self.mixture
    }

    /// The exact radial density up to its normalizing constant.
    pub fn unnormalized_density(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .map(|c| {
                let rho = linalg::dist(x, c) - self.radius;
                (-rho * rho / (2.0 * self.variance)).exp()
            })
            .sum()
    }

    /// Exact draw from the radial law (not the discretization).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let i = rng.random_range(0..self.centers.len());
        let sd = self.variance.sqrt();
        // radial density ∝ ρ exp(−(ρ−r)²/2v): Gaussian proposal, accept ∝ ρ
        let cap = self.radius + 12.0 * sd;
        let rho = loop {
            let z: f64 = rng.sample(StandardNormal);
            let rho = self.radius + sd * z;
            if rho <= 0.0 || rho > cap {
                continue;
            }
            let u: f64 = rng.random();
            if u * cap < rho {
                break rho;
            }
        };
        let theta = rng.random::<f64>() * 2.0 * PI;
        let c = &self.centers[i];
        vec![c[0] + rho * theta.cos(), c[1] + rho * theta.sin()]
    }
}

fn discretize(centers: &[Vec<f64>], radius: f64, variance: f64, n: usize) -> Result<GaussianMixture> {
    let total = centers.len() * n;
    let w = 1.0 / total as f64;
    let mut means = Vec::with_capacity(total);
    for c in centers {
        for k in 0..n {
            let angle = 2.0 * PI * k as f64 / n as f64;
            means.push(vec![c[0] + radius * angle.cos(), c[1] + radius * angle.sin()]);
        }
    }
    // renormalize so rounding in w cannot trip the weight-sum check
    let mut weights = vec![w; total];
    let sum: f64 = weights.iter().sum();
    for wi in &mut weights {
        *wi /= sum;
    }
    GaussianMixture::isotropic(&weights, &means, &vec![variance; total])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn four_point_discretization() {
        let m = RadialGaussianMixture::new(vec![vec![0.0, 0.0]], 1.0, 0.3, 16).unwrap();
        assert_eq!(m.as_mixture().components().len(), 16);
        let m = discretize(&[vec![0.0, 0.0]], 1.0, 0.3, 4).unwrap();
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (c, e) in m.components().iter().zip(expect) {
            assert!((c.mean[0] - e[0]).abs() < 1e-15 && (c.mean[1] - e[1]).abs() < 1e-15);
            assert_eq!(c.weight, 0.25);
        }
    }

    #[test]
    fn center_is_a_critical_point() {
        let m = RadialGaussianMixture::new(vec![vec![2.0, -1.0]], 10.0, 2.5, 256).unwrap();
        for sigma in [0.1, 1.0, 30.0] {
            let s = m.as_mixture().smoothed_score(sigma, &[2.0, -1.0]).unwrap();
            assert!(linalg::norm(&s) < 1e-10, "{s:?}");
        }
    }

    #[test]
    fn rejects_too_few_points() {
        assert!(RadialGaussianMixture::new(vec![vec![0.0, 0.0]], 1.0, 1.0, 8).is_err());
    }

    #[test]
    fn samples_concentrate_on_ring() {
        let m = RadialGaussianMixture::new(vec![vec![0.0, 0.0]], 10.0, 2.5, 64).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        let n = 20_000;
        let mut mean_dev = 0.0;
        let mut sq_dev = 0.0;
        for _ in 0..n {
            let dev = linalg::norm(&m.sample(&mut rng)) - 10.0;
            mean_dev += dev;
            sq_dev += dev * dev;
        }
        mean_dev /= n as f64;
        sq_dev /= n as f64;
        // ρ-weighting shifts the radial mean by v/r = 0.25
        assert!((mean_dev - 0.25).abs() < 0.05, "{mean_dev}");
        assert!((sq_dev - mean_dev * mean_dev - 2.5).abs() < 0.15, "{sq_dev}");
    }
}
