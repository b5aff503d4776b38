//! A small learned denoiser exposed as a score oracle.
//!
//! The network predicts a residual `F_θ` and the denoiser is
//! `D(x, σ) = x + σ F_θ(c_in x, log σ)` with `c_in = 1/√(σ² + σ_data²)`.
//! The score follows from `D(x, σ) = σ² S(σ, x) + x`.

mod checkpoint;
pub mod mlp;
mod train;

pub use checkpoint::{Checkpoint, ValidationRecord, CHECKPOINT_SCHEMA_VERSION};
pub use mlp::{Activation, Mlp};
pub use train::{
    gradient_check, log_csv, train_denoiser, validation_loss, GradientCheck, TrainConfig, TrainLogEntry, TrainOutcome,
};

use ndarray::{Array2, ArrayView2};

use crate::error::{check_dim, Error, Result};
use crate::xscore::{check_sigma, ScoreOracle};

/// Anything that maps a noisy point to an estimate of the clean one.
pub trait Denoiser: Send + Sync {
    fn dim(&self) -> usize;
    fn sigma_range(&self) -> (f64, f64);
    fn denoise(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>>;
}

/// `S = (D(x, σ) − x) / σ²`.
pub struct DenoiserScore<D>(pub D);

impl<D: Denoiser> ScoreOracle for DenoiserScore<D> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn sigma_range(&self) -> (f64, f64) {
        self.0.sigma_range()
    }
    fn score(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.0.denoise(sigma, x)?;
        Ok(d.iter().zip(x).map(|(d, x)| (d - x) / (sigma * sigma)).collect())
    }
}

/// `D = σ² S(σ, x) + x`.
pub struct ScoreDenoiser<O>(pub O);

impl<O: ScoreOracle> Denoiser for ScoreDenoiser<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn sigma_range(&self) -> (f64, f64) {
        self.0.sigma_range()
    }
    fn denoise(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        let s = self.0.score(sigma, x)?;
        Ok(s.iter().zip(x).map(|(s, x)| sigma * sigma * s + x).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpDenoiser {
    pub net: Mlp,
    pub dim: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_data: f64,
}

impl MlpDenoiser {
    pub fn new(net: Mlp, dim: usize, sigma_min: f64, sigma_max: f64, sigma_data: f64) -> Result<Self> {
        if net.input_dim() != dim + 1 || net.output_dim() != dim {
            return Err(Error::InvalidModel(format!(
                "network widths {:?} do not fit dimension {dim}",
                net.widths()
            )));
        }
        if !(sigma_min > 0.0 && sigma_min <= sigma_max && sigma_max.is_finite()) {
            return Err(Error::InvalidParameter("need 0 < sigma_min ≤ sigma_max".into()));
        }
        if !(sigma_data > 0.0) {
            return Err(Error::InvalidParameter("sigma_data must be positive".into()));
        }
        Ok(Self { net, dim, sigma_min, sigma_max, sigma_data })
    }

    /// `log σ` rescaled to `[−1, 1]` over the validity range.
    fn sigma_feature(&self, sigma: f64) -> f64 {
        let (lo, hi) = (self.sigma_min.ln(), self.sigma_max.ln());
        if hi > lo {
            (2.0 * sigma.ln() - lo - hi) / (hi - lo)
        } else {
            0.0
        }
    }

    /// Network inputs for a batch of rows `x` with per-row noise levels.
    pub fn features(&self, sigmas: &[f64], x: ArrayView2<f64>) -> Array2<f64> {
        let n = x.nrows();
        let mut f = Array2::zeros((n, self.dim + 1));
        for i in 0..n {
            let c_in = 1.0 / (sigmas[i] * sigmas[i] + self.sigma_data * self.sigma_data).sqrt();
            for k in 0..self.dim {
                f[[i, k]] = c_in * x[[i, k]];
            }
            f[[i, self.dim]] = self.sigma_feature(sigmas[i]);
        }
        f
    }

    /// Residual `F_θ` for a batch.
    pub fn residual(&self, sigmas: &[f64], x: ArrayView2<f64>) -> Array2<f64> {
        self.net.forward(self.features(sigmas, x).view())
    }

    fn residual_one(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_sigma(self, sigma)?;
        check_dim(self.dim, x.len())?;
        let row = ArrayView2::from_shape((1, self.dim), x).expect("row shape");
        Ok(self.residual(&[sigma], row).into_raw_vec_and_offset().0)
    }
}

impl Denoiser for MlpDenoiser {
    fn dim(&self) -> usize {
        self.dim
    }
    fn sigma_range(&self) -> (f64, f64) {
        (self.sigma_min, self.sigma_max)
    }
    fn denoise(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.residual_one(sigma, x)?;
        Ok(x.iter().zip(&f).map(|(x, f)| x + sigma * f).collect())
    }
}

impl ScoreOracle for MlpDenoiser {
    fn dim(&self) -> usize {
        self.dim
    }
    fn sigma_range(&self) -> (f64, f64) {
        (self.sigma_min, self.sigma_max)
    }
    /// `(D − x)/σ²`, evaluated as `F_θ/σ` to avoid cancelling `x`.
    fn score(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.residual_one(sigma, x)?;
        Ok(f.into_iter().map(|v| v / sigma).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DiracMixture, GaussianMixture, Model};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct Constant(Vec<f64>);

    impl Denoiser for Constant {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn sigma_range(&self) -> (f64, f64) {
            (1e-3, 100.0)
        }
        fn denoise(&self, _sigma: f64, _x: &[f64]) -> Result<Vec<f64>> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn zero_head_is_identity_denoiser() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let net = Mlp::new(&[3, 16, 2], Activation::Silu, true, &mut rng);
        let d = MlpDenoiser::new(net, 2, 0.01, 10.0, 1.0).unwrap();
        assert_eq!(d.denoise(0.5, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(d.score(0.5, &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert!(d.score(20.0, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn constant_denoiser_gives_point_mass_score() {
        let mu = vec![0.5, -1.0];
        let oracle = DenoiserScore(Constant(mu.clone()));
        let exact: Model = DiracMixture::point(mu).unwrap().into();
        for (sigma, x) in [(0.3, [1.0, 1.0]), (2.0, [-4.0, 0.5])] {
            let a = oracle.score(sigma, &x).unwrap();
            let b = exact.score(crate::ScoreKind::Smoothed { sigma }, &x).unwrap();
            for k in 0..2 {
                assert!((a[k] - b[k]).abs() < 1e-12 * (1.0 + b[k].abs()));
            }
        }
    }

    #[test]
    fn wrapping_round_trip() {
        let gm: Model = GaussianMixture::isotropic(&[0.3, 0.7], &[vec![-1.0], vec![2.0]], &[0.4, 0.9])
            .unwrap()
            .into();
        let back = DenoiserScore(ScoreDenoiser(&gm));
        for (sigma, x) in [(0.1, 0.3), (1.0, -2.0), (5.0, 7.0)] {
            let a = back.score(sigma, &[x]).unwrap()[0];
            let b = ScoreOracle::score(&gm, sigma, &[x]).unwrap()[0];
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn mismatched_network_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let net = Mlp::new(&[2, 4, 2], Activation::Tanh, true, &mut rng);
        assert!(MlpDenoiser::new(net, 2, 0.01, 1.0, 1.0).is_err());
    }
}
