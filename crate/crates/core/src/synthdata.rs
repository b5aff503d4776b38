//! Toy target distributions and noisy-manifold training sets.
//!
//! Every generator is a pure function of its [`DatasetSpec`]; random model
//! parameters (means, rotations) come from the spec seed and samples from an
//! independent stream of the same seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{DiracMixture, GaussianMixture, Model, ProductModel, RadialGaussianMixture, DEFAULT_QUADRATURE_POINTS};
use crate::sampler::metrics::Reference;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// Variances and means of the five-component line mixture.
pub const LINE_MIXTURE_VARIANCES: [f64; 5] = [0.2, 0.5, 1.0, 2.0, 4.0];
pub const LINE_MIXTURE_MEANS: [f64; 5] = [-20.0, -10.0, 0.0, 10.0, 20.0];

/// Principal and minor variances of every tilted component.
pub const TILTED_VARIANCES: (f64, f64) = (1.7, 0.2);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Manifold {
    /// Segment `[−half_length, half_length] · e₁`.
    Line { half_length: f64 },
    /// Circle of the given radius about the origin in the `e₁, e₂` plane.
    Circle { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetKind {
    /// Five 1D Gaussians on the `x₁` axis times a point mass at `x₂ = 0`.
    LineMixture,
    /// Randomly rotated planar Gaussians with covariance `R diag(1.7, 0.2) Rᵀ`.
    TiltedGaussians {
        #[serde(default = "default_tilted_components")]
        components: usize,
        /// Means are uniform in `[−box_half, box_half]²`.
        #[serde(default = "default_tilted_box")]
        box_half: f64,
    },
    /// Rings of radius `r` and radial variance `v` around random centres.
    RadialRings {
        #[serde(default = "default_ring_count")]
        centers: usize,
        #[serde(default = "default_ring_box")]
        box_half: f64,
        #[serde(default = "default_ring_radius")]
        radius: f64,
        #[serde(default = "default_ring_variance")]
        variance: f64,
        /// Reject centre draws closer than `2r` to an earlier centre.
        #[serde(default)]
        min_spacing: bool,
        #[serde(default = "default_quadrature")]
        quadrature_points: usize,
    },
    /// Uniform points on a manifold plus isotropic Gaussian noise.
    ManifoldNoisy {
        manifold: Manifold,
        ambient_dim: usize,
        noise_std: f64,
    },
}

fn default_tilted_components() -> usize {
    21
}
fn default_tilted_box() -> f64 {
    12.0
}
fn default_ring_count() -> usize {
    5
}
fn default_ring_box() -> f64 {
    20.0
}
fn default_ring_radius() -> f64 {
    10.0
}
fn default_ring_variance() -> f64 {
    2.5
}
fn default_quadrature() -> usize {
    DEFAULT_QUADRATURE_POINTS
}

impl DatasetKind {
    pub fn tilted() -> Self {
        DatasetKind::TiltedGaussians { components: default_tilted_components(), box_half: default_tilted_box() }
    }

    pub fn radial() -> Self {
        DatasetKind::RadialRings {
            centers: default_ring_count(),
            box_half: default_ring_box(),
            radius: default_ring_radius(),
            variance: default_ring_variance(),
            min_spacing: false,
            quadrature_points: default_quadrature(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub kind: DatasetKind,
    pub samples: usize,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(kind: DatasetKind, samples: usize, seed: u64) -> Self {
        Self { kind, samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.samples == 0 {
            return bad("sample count must be positive");
        }
        match &self.kind {
            DatasetKind::LineMixture => {}
            DatasetKind::TiltedGaussians { components, box_half } => {
                if *components == 0 || !(*box_half >= 0.0) {
                    return bad("tilted mixture needs components > 0 and box_half ≥ 0");
                }
            }
            DatasetKind::RadialRings { centers, box_half, radius, variance, quadrature_points, .. } => {
                if *centers == 0 || !(*box_half >= 0.0) || !(*radius > 0.0) || !(*variance > 0.0) {
                    return bad("rings need centers > 0, box_half ≥ 0, radius > 0, variance > 0");
                }
                if *quadrature_points < 16 {
                    return bad("rings need at least 16 quadrature points");
                }
            }
            DatasetKind::ManifoldNoisy { manifold, ambient_dim, noise_std } => {
                let min_dim = match manifold {
                    Manifold::Line { half_length } if *half_length > 0.0 => 1,
                    Manifold::Circle { radius } if *radius > 0.0 => 2,
                    _ => return bad("manifold size must be positive"),
                };
                if *ambient_dim < min_dim {
                    return bad("ambient dimension too small for the manifold");
                }
                if !(*noise_std >= 0.0) {
                    return bad("noise_std must be ≥ 0");
                }
            }
        }
        Ok(())
    }

    fn model_rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.seed)
    }

    fn sample_rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        rng
    }
}

/// The analytic model behind `spec`, or `None` for noisy-manifold sets.
pub fn build_model(spec: &DatasetSpec) -> Result<Option<Model>> {
    spec.validate()?;
    let mut rng = spec.model_rng();
    let model: Model = match &spec.kind {
        DatasetKind::LineMixture => line_mixture()?,
        DatasetKind::TiltedGaussians { components, box_half } => {
            tilted_gaussians(*components, *box_half, &mut rng)?.into()
        }
        DatasetKind::RadialRings { centers, box_half, radius, variance, min_spacing, quadrature_points } => {
            let mut cs: Vec<Vec<f64>> = Vec::with_capacity(*centers);
            let mut attempts = 0usize;
            while cs.len() < *centers {
                let c = vec![uniform(&mut rng, *box_half), uniform(&mut rng, *box_half)];
                attempts += 1;
                if *min_spacing && cs.iter().any(|o| linalg::dist(o, &c) < 2.0 * radius) {
                    if attempts > 100_000 {
                        return Err(Error::InvalidParameter("cannot space ring centres in the box".into()));
                    }
                    continue;
                }
                cs.push(c);
            }
            RadialGaussianMixture::new(cs, *radius, *variance, *quadrature_points)?.into()
        }
        DatasetKind::ManifoldNoisy { .. } => return Ok(None),
    };
    Ok(Some(model))
}

/// `mixture(x₁) ⊗ δ₀(x₂)` with the five fixed line components.
pub fn line_mixture() -> Result<Model> {
    let means: Vec<Vec<f64>> = LINE_MIXTURE_MEANS.iter().map(|&m| vec![m]).collect();
    let first = GaussianMixture::isotropic(&[0.2; 5], &means, &LINE_MIXTURE_VARIANCES)?;
    Ok(ProductModel::new(vec![first.into(), DiracMixture::point(vec![0.0])?.into()])?.into())
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, half: f64) -> f64 {
    (2.0 * rng.random::<f64>() - 1.0) * half
}

fn tilted_gaussians<R: Rng + ?Sized>(k: usize, box_half: f64, rng: &mut R) -> Result<GaussianMixture> {
    let (major, minor) = TILTED_VARIANCES;
    let comps = (0..k)
        .map(|_| {
            let mean = vec![uniform(rng, box_half), uniform(rng, box_half)];
            let angle = rng.random::<f64>() * PI;
            let (c, s) = (angle.cos(), angle.sin());
            let cov = vec![
                major * c * c + minor * s * s,
                (major - minor) * c * s,
                (major - minor) * c * s,
                major * s * s + minor * c * c,
            ];
            (1.0 / k as f64, mean, cov)
        })
        .collect::<Vec<_>>();
    let total: f64 = comps.iter().map(|c| c.0).sum();
    GaussianMixture::new(2, comps.into_iter().map(|(w, m, c)| (w / total, m, c)).collect())
}

/// Draws `spec.samples` points.
pub fn sample_dataset(spec: &DatasetSpec) -> Result<Vec<Vec<f64>>> {
    let model = build_model(spec)?;
    let mut rng = spec.sample_rng();
    Ok(match (&spec.kind, model) {
        (DatasetKind::ManifoldNoisy { manifold, ambient_dim, noise_std }, _) => (0..spec.samples)
            .map(|_| {
                let mut p = manifold_point(manifold, *ambient_dim, &mut rng);
                for v in &mut p {
                    let z: f64 = rng.sample(StandardNormal);
                    *v += noise_std * z;
                }
                p
            })
            .collect(),
        (_, Some(m)) => (0..spec.samples).map(|_| m.sample(&mut rng)).collect(),
        (_, None) => unreachable!("every non-manifold kind has a model"),
    })
}

/// `n` draws from `model` on stream 1 of `seed`, matching [`sample_dataset`].
pub fn sample_model(model: &Model, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..n).map(|_| model.sample(&mut rng)).collect()
}

fn manifold_point<R: Rng + ?Sized>(manifold: &Manifold, dim: usize, rng: &mut R) -> Vec<f64> {
    let mut p = vec![0.0; dim];
    match manifold {
        Manifold::Line { half_length } => p[0] = uniform(rng, *half_length),
        Manifold::Circle { radius } => {
            let a = rng.random::<f64>() * 2.0 * PI;
            p[0] = radius * a.cos();
            p[1] = radius * a.sin();
        }
    }
    p
}

/// The clean support of a noisy-manifold set.
pub fn manifold_reference(manifold: &Manifold, dim: usize) -> Reference {
    match manifold {
        Manifold::Line { half_length } => {
            let mut a = vec![0.0; dim];
            let mut b = vec![0.0; dim];
            a[0] = -half_length;
            b[0] = *half_length;
            Reference::Segment { a, b }
        }
        Manifold::Circle { radius } => Reference::Circles { centers: vec![vec![0.0, 0.0]], radius: *radius },
    }
}

/// Reference sets that endpoints from `spec` should approach.
pub fn references(spec: &DatasetSpec, model: Option<&Model>) -> Vec<Reference> {
    match (&spec.kind, model) {
        (DatasetKind::ManifoldNoisy { manifold, ambient_dim, .. }, _) => {
            vec![manifold_reference(manifold, *ambient_dim)]
        }
        (DatasetKind::RadialRings { radius, .. }, Some(Model::Radial(m))) => {
            vec![Reference::Circles { centers: m.centers().to_vec(), radius: *radius }]
        }
        (_, Some(m)) => vec![Reference::Points { points: m.basin_centers() }],
        _ => Vec::new(),
    }
}

/// Position of `x` relative to the principal axis of its most responsible component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisOffset {
    pub component: usize,
    pub along: f64,
    pub across: f64,
}

/// Decomposes `x − μ_k` into principal-axis and orthogonal parts, where `k`
/// maximizes the unsmoothed responsibility at `x`.
pub fn axis_offset(model: &GaussianMixture, x: &[f64]) -> Result<AxisOffset> {
    let r = model.responsibilities(x)?;
    let k = r
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0;
    let c = &model.components()[k];
    let d = model.dim();
    let (_, vecs) = linalg::sym_eigen(&c.covariance, d);
    let axis: Vec<f64> = (0..d).map(|row| vecs[row * d]).collect();
    let diff = linalg::sub(x, &c.mean);
    let along = linalg::dot(&diff, &axis);
    let across = (linalg::dot(&diff, &diff) - along * along).max(0.0).sqrt();
    Ok(AxisOffset { component: k, along, across })
}
