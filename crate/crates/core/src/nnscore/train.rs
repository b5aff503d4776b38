//! Denoising score matching with Adam.
//!
//! For a clean point `y`, noise level `σ` and `x = y + σε`, the per-sample
//! loss is `‖D(x, σ) − y‖² / σ² = ‖F_θ + ε‖²`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Mlp};
use super::MlpDenoiser;
use crate::error::{Error, Result};
use crate::oracle::central_diff;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Cosine decay ends at `learning_rate · final_lr_fraction`.
    pub final_lr_fraction: f64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub seed: u64,
    pub validation_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            batch_size: 256,
            learning_rate: 2e-3,
            final_lr_fraction: 0.02,
            hidden: vec![128, 128, 128],
            activation: Activation::Silu,
            sigma_min: 0.002,
            sigma_max: 80.0,
            seed: 0,
            validation_size: 2048,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(self.learning_rate > 0.0) || !(self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return bad("learning rate must be positive and final fraction in (0, 1]".into());
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad(format!("hidden widths {:?} must be nonempty and positive", self.hidden));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min <= self.sigma_max && self.sigma_max.is_finite()) {
            return bad(format!("need 0 < sigma_min ≤ sigma_max, got {}, {}", self.sigma_min, self.sigma_max));
        }
        if self.validation_size == 0 {
            return bad("validation_size must be positive".into());
        }
        Ok(())
    }

    pub fn learning_rate_at(&self, iteration: usize) -> f64 {
        if self.iterations <= 1 {
            return self.learning_rate;
        }
        let progress = iteration as f64 / (self.iterations - 1) as f64;
        let floor = self.final_lr_fraction;
        self.learning_rate * (floor + (1.0 - floor) * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainLogEntry {
    pub iteration: usize,
    pub loss: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub denoiser: MlpDenoiser,
    pub log: Vec<TrainLogEntry>,
    pub validation_loss: f64,
}

/// Root-mean-square coordinate spread, floored to stay positive.
fn data_scale(data: &[Vec<f64>]) -> f64 {
    let d = data[0].len();
    let n = data.len() as f64;
    let mut total = 0.0;
    for k in 0..d {
        let mean = data.iter().map(|p| p[k]).sum::<f64>() / n;
        total += data.iter().map(|p| (p[k] - mean).powi(2)).sum::<f64>() / n;
    }
    (total / d as f64).sqrt().max(1e-3)
}

fn check_data(data: &[Vec<f64>]) -> Result<usize> {
    let d = data.first().map(Vec::len).ok_or_else(|| Error::InvalidParameter("empty dataset".into()))?;
    if d == 0 || data.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidParameter("dataset rows must share a positive dimension".into()));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dataset"));
    }
    Ok(d)
}

/// A minibatch `(σ, x, ε)`; the target residual is `−ε`.
struct Batch {
    sigmas: Vec<f64>,
    x: Array2<f64>,
    eps: Array2<f64>,
}

fn draw_batch<R: Rng>(rng: &mut R, data: &[Vec<f64>], size: usize, lo: f64, hi: f64) -> Batch {
    let d = data[0].len();
    let mut sigmas = Vec::with_capacity(size);
    let mut x = Array2::zeros((size, d));
    let mut eps = Array2::zeros((size, d));
    let (llo, lhi) = (lo.ln(), hi.ln());
    for i in 0..size {
        let y = &data[rng.random_range(0..data.len())];
        let u: f64 = rng.random();
        let sigma = (llo + u * (lhi - llo)).exp();
        sigmas.push(sigma);
        for k in 0..d {
            let e: f64 = rng.sample(StandardNormal);
            eps[[i, k]] = e;
            x[[i, k]] = y[k] + sigma * e;
        }
    }
    Batch { sigmas, x, eps }
}

fn batch_loss(model: &MlpDenoiser, b: &Batch) -> f64 {
    let f = model.residual(&b.sigmas, b.x.view());
    (&f + &b.eps).mapv(|r| r * r).sum() / b.sigmas.len() as f64
}

fn validation_rng(seed: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(2);
    rng
}

/// Loss on a fixed batch regenerated from `seed`.
pub fn validation_loss(model: &MlpDenoiser, data: &[Vec<f64>], seed: u64, size: usize) -> Result<f64> {
    check_data(data)?;
    let b = draw_batch(&mut validation_rng(seed), data, size, model.sigma_min, model.sigma_max);
    Ok(batch_loss(model, &b))
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Trains a fresh denoiser on `data`. Single-threaded and deterministic in `config.seed`.
pub fn train_denoiser(config: &TrainConfig, data: &[Vec<f64>]) -> Result<TrainOutcome> {
    config.validate()?;
    let d = check_data(data)?;
    let mut init_rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut widths = vec![d + 1];
    widths.extend(&config.hidden);
    widths.push(d);
    let net = Mlp::new(&widths, config.activation, true, &mut init_rng);
    let mut model = MlpDenoiser::new(net, d, config.sigma_min, config.sigma_max, data_scale(data))?;

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut params = model.net.params();
    let mut adam = Adam::new(params.len());
    let mut log = Vec::with_capacity(config.iterations);
    for it in 0..config.iterations {
        let b = draw_batch(&mut rng, data, config.batch_size, config.sigma_min, config.sigma_max);
        let feats = model.features(&b.sigmas, b.x.view());
        let (f, cache) = model.net.forward_cached(feats.view());
        let r = &f + &b.eps;
        let n = config.batch_size as f64;
        let loss = r.mapv(|v| v * v).sum() / n;
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { iteration: it });
        }
        let grads = model.net.backward(&cache, r * (2.0 / n)).flatten();
        let lr = config.learning_rate_at(it);
        adam.step(&mut params, &grads, lr);
        model.net.set_params(&params);
        log.push(TrainLogEntry { iteration: it, loss, learning_rate: lr });
    }
    if model.net.params().iter().any(|p| !p.is_finite()) {
        return Err(Error::TrainingDiverged { iteration: config.iterations });
    }
    let validation_loss = validation_loss(&model, data, config.seed, config.validation_size)?;
    Ok(TrainOutcome { denoiser: model, log, validation_loss })
}

/// `iteration,loss,learning_rate` rows with a header.
pub fn log_csv(log: &[TrainLogEntry]) -> String {
    let mut out = String::from("iteration,loss,learning_rate\n");
    for e in log {
        out.push_str(&format!("{},{:e},{:e}\n", e.iteration, e.loss, e.learning_rate));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub checked: usize,
    pub max_relative_error: f64,
}

/// Compares backpropagated loss gradients with Richardson-extrapolated
/// central differences at `count` randomly chosen parameters.
pub fn gradient_check(model: &MlpDenoiser, data: &[Vec<f64>], count: usize, seed: u64) -> Result<GradientCheck> {
    check_data(data)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let b = draw_batch(&mut rng, data, 16, model.sigma_min, model.sigma_max);
    let feats = model.features(&b.sigmas, b.x.view());
    let (f, cache) = model.net.forward_cached(feats.view());
    let n = b.sigmas.len() as f64;
    let analytic = model.net.backward(&cache, (&f + &b.eps) * (2.0 / n)).flatten();

    let base = model.net.params();
    let loss_at = |flat: &[f64]| {
        let mut net = model.net.clone();
        net.set_params(flat);
        let out = net.forward(feats.view());
        (&out + &b.eps).mapv(|v| v * v).sum() / n
    };
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let i = rng.random_range(0..base.len());
        let numeric = central_diff(
            |p| {
                let mut flat = base.clone();
                flat[i] = p;
                Ok(vec![loss_at(&flat)])
            },
            base[i],
            1e-4,
            true,
        )?[0];
        let a = analytic[i];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    Ok(GradientCheck { checked: count, max_relative_error: worst })
}
