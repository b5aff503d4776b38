//! Analytic probability models with exact smoothed and extended scores.
//!
//! Every model answers three questions at a point `x`:
//!
//! * the smoothed score `∇ log (p * g_{σ²})(x)`,
//! * the extended score `H_γ p(x) = (1+γ) S(p*g_γ)(x) + γ ∂_γ S(p*g_γ)(x)`,
//! * its limit `H_0 p(x)` as `γ → 0`, which exists for Dirac mixtures and
//!   Gaussians supported on affine subspaces as well as for proper densities.
//!
//! Products of models over disjoint coordinate blocks evaluate blockwise.

mod degenerate;
mod dirac;
mod gaussian;
mod radial;
mod schema;

pub use degenerate::DegenerateGaussian;
pub use dirac::{DiracMixture, TIE_TOLERANCE};
pub use gaussian::{GaussianComponent, GaussianMixture};
pub use radial::{RadialGaussianMixture, DEFAULT_QUADRATURE_POINTS};
pub use schema::{AtomDef, ComponentDef, ModelDef, ModelFile, MODEL_SCHEMA_VERSION};

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::xscore::ScoreOracle;

/// Which score-like field to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreKind {
    /// `S(p * g_{σ²})`.
    Smoothed { sigma: f64 },
    /// `H_γ p`.
    HGamma { gamma: f64 },
    /// `H_0 p`.
    H0,
}

impl ScoreKind {
    fn name(&self) -> &'static str {
        match self {
            ScoreKind::Smoothed { .. } => "smoothed",
            ScoreKind::HGamma { .. } => "h_gamma",
            ScoreKind::H0 => "h0",
        }
    }
}

/// Product `p₁ ⊗ … ⊗ p_k` over contiguous coordinate blocks.
#[derive(Debug, Clone)]
pub struct ProductModel {
    factors: Vec<Model>,
    dim: usize,
}

impl ProductModel {
    pub fn new(factors: Vec<Model>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidModel("product needs at least one factor".into()));
        }
        for f in &factors {
            if matches!(f, Model::Product(_) | Model::Radial(_)) {
                return Err(Error::InvalidModel(
                    "product factors must be Gaussian mixtures, Dirac mixtures or degenerate Gaussians"
                        .into(),
                ));
            }
        }
        let dim = factors.iter().map(Model::dim).sum();
        Ok(Self { factors, dim })
    }

    pub fn factors(&self) -> &[Model] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn blocks(&self) -> impl Iterator<Item = (&Model, std::ops::Range<usize>)> {
        let mut start = 0;
        self.factors.iter().map(move |f| {
            let r = start..start + f.dim();
            start = r.end;
            (f, r)
        })
    }

    /// Concatenation of per-block evaluations.
    pub fn score(&self, kind: ScoreKind, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let mut out = Vec::with_capacity(self.dim);
        for (f, r) in self.blocks() {
            out.extend(f.score(kind, &x[r])?);
        }
        Ok(out)
    }

    fn score_and_variance_derivative(&self, u: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_dim(self.dim, x.len())?;
        let mut s = Vec::with_capacity(self.dim);
        let mut ds = Vec::with_capacity(self.dim);
        for (f, r) in self.blocks() {
            let (a, b) = f.score_and_variance_derivative(u, &x[r])?;
            s.extend(a);
            ds.extend(b);
        }
        Ok((s, ds))
    }
}

/// Any of the analytic models.
#[derive(Debug, Clone)]
pub enum Model {
    GaussianMixture(GaussianMixture),
    DiracMixture(DiracMixture),
    DegenerateGaussian(DegenerateGaussian),
    Product(ProductModel),
    Radial(RadialGaussianMixture),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::GaussianMixture(m) => m.dim(),
            Model::DiracMixture(m) => m.dim(),
            Model::DegenerateGaussian(m) => m.dim(),
            Model::Product(m) => m.dim(),
            Model::Radial(_) => 2,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::GaussianMixture(_) => "gaussian_mixture",
            Model::DiracMixture(_) => "dirac_mixture",
            Model::DegenerateGaussian(_) => "degenerate_gaussian",
            Model::Product(_) => "product",
            Model::Radial(_) => "radial",
        }
    }

    pub fn score(&self, kind: ScoreKind, x: &[f64]) -> Result<Vec<f64>> {
        match (self, kind) {
            (Model::GaussianMixture(m), ScoreKind::Smoothed { sigma }) => m.smoothed_score(sigma, x),
            (Model::GaussianMixture(m), ScoreKind::HGamma { gamma }) => m.h_gamma(gamma, x),
            (Model::GaussianMixture(m), ScoreKind::H0) => m.score_at_variance(0.0, x),
            (Model::DiracMixture(m), ScoreKind::Smoothed { sigma }) => m.smoothed_score(sigma * sigma, x),
            (Model::DiracMixture(m), ScoreKind::HGamma { gamma }) => m.h_gamma(gamma, x),
            (Model::DiracMixture(m), ScoreKind::H0) => m.h0(x),
            (Model::DegenerateGaussian(m), ScoreKind::Smoothed { sigma }) => {
                m.score_at_variance(sigma * sigma, x)
            }
            (Model::DegenerateGaussian(m), ScoreKind::HGamma { gamma }) => m.h_gamma(gamma, x),
            (Model::DegenerateGaussian(m), ScoreKind::H0) => m.h0(x),
            (Model::Product(m), k) => m.score(k, x),
            (Model::Radial(m), ScoreKind::Smoothed { sigma }) => m.as_mixture().smoothed_score(sigma, x),
            (Model::Radial(m), ScoreKind::HGamma { gamma }) => m.as_mixture().h_gamma(gamma, x),
            (Model::Radial(_), k) => Err(Error::Unsupported { kind: k.name(), model: "radial" }),
        }
    }

    /// `S(p * g_u)` and `∂_u S(p * g_u)` for an added variance `u`.
    pub fn score_and_variance_derivative(&self, u: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            Model::GaussianMixture(m) => m.score_and_variance_derivative(u, x),
            Model::DiracMixture(m) => m.score_and_variance_derivative(u, x),
            Model::DegenerateGaussian(m) => m.score_and_variance_derivative(u, x),
            Model::Product(m) => m.score_and_variance_derivative(u, x),
            Model::Radial(m) => m.as_mixture().score_and_variance_derivative(u, x),
        }
    }

    /// Exact draw from the model.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Model::GaussianMixture(m) => m.sample(rng),
            Model::DiracMixture(m) => m.sample(rng),
            Model::DegenerateGaussian(m) => m.sample(rng),
            Model::Product(m) => m.factors.iter().flat_map(|f| f.sample(rng)).collect(),
            Model::Radial(m) => m.sample(rng),
        }
    }

    /// Representative locations used to group endpoints into basins.
    pub fn basin_centers(&self) -> Vec<Vec<f64>> {
        match self {
            Model::GaussianMixture(m) => m.components().iter().map(|c| c.mean.clone()).collect(),
            Model::DiracMixture(m) => m.atoms().to_vec(),
            Model::DegenerateGaussian(m) => vec![m.mean()],
            Model::Radial(m) => m.centers().to_vec(),
            Model::Product(m) => {
                let mut out: Vec<Vec<f64>> = vec![Vec::new()];
                for f in m.factors() {
                    let mut next = Vec::new();
                    for prefix in &out {
                        for c in f.basin_centers() {
                            let mut p = prefix.clone();
                            p.extend(c);
                            next.push(p);
                        }
                    }
                    out = next;
                }
                out
            }
        }
    }
}

impl ScoreOracle for Model {
    fn dim(&self) -> usize {
        Model::dim(self)
    }

    fn score(&self, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
        Model::score(self, ScoreKind::Smoothed { sigma }, x)
    }

    fn sigma_derivative(&self, sigma: f64, x: &[f64]) -> Option<Result<Vec<f64>>> {
        // ∂_σ S(p_σ) = 2σ ∂_u S(p * g_u) at u = σ²
        Some(
            self.score_and_variance_derivative(sigma * sigma, x)
                .map(|(_, ds)| ds.into_iter().map(|v| 2.0 * sigma * v).collect()),
        )
    }
}

impl From<GaussianMixture> for Model {
    fn from(m: GaussianMixture) -> Self {
        Model::GaussianMixture(m)
    }
}

impl From<DiracMixture> for Model {
    fn from(m: DiracMixture) -> Self {
        Model::DiracMixture(m)
    }
}

impl From<DegenerateGaussian> for Model {
    fn from(m: DegenerateGaussian) -> Self {
        Model::DegenerateGaussian(m)
    }
}

impl From<ProductModel> for Model {
    fn from(m: ProductModel) -> Self {
        Model::Product(m)
    }
}

impl From<RadialGaussianMixture> for Model {
    fn from(m: RadialGaussianMixture) -> Self {
        Model::Radial(m)
    }
}
