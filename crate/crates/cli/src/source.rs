//! Loading a score oracle and the reference sets used to summarize endpoints.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use mad_core::nnscore::{Checkpoint, MlpDenoiser};
use mad_core::sampler::metrics::Reference;
use mad_core::synthdata::{axis_offset, sample_model};
use mad_core::{Model, ScoreOracle};

use crate::args::SourceArgs;
use crate::failure::Failure;

pub enum Source {
    Analytic(Model),
    Learned(MlpDenoiser),
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleInfo {
    pub kind: String,
    pub dim: usize,
    pub sigma_min: f64,
    pub sigma_max: Option<f64>,
}

impl Source {
    pub fn load(args: &SourceArgs) -> Result<Self> {
        match (&args.model, &args.checkpoint) {
            (Some(path), None) => {
                let model = Model::load(path).with_context(|| format!("loading model {}", path.display()))?;
                Ok(Source::Analytic(model))
            }
            (None, Some(path)) => {
                let ck = Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))?;
                Ok(Source::Learned(ck.to_denoiser()?))
            }
            _ => Err(Failure::bad_input("exactly one of --model or --checkpoint is required").into()),
        }
    }

    pub fn oracle(&self) -> &dyn ScoreOracle {
        match self {
            Source::Analytic(m) => m,
            Source::Learned(d) => d,
        }
    }

    pub fn is_learned(&self) -> bool {
        matches!(self, Source::Learned(_))
    }

    pub fn info(&self) -> OracleInfo {
        let o = self.oracle();
        let (lo, hi) = o.sigma_range();
        OracleInfo {
            kind: match self {
                Source::Analytic(m) => m.kind_name().to_string(),
                Source::Learned(_) => "mlp_denoiser".to_string(),
            },
            dim: o.dim(),
            sigma_min: lo,
            sigma_max: hi.is_finite().then_some(hi),
        }
    }

    /// Model-implied references followed by any from `--references`.
    pub fn references(&self, extra: Option<&Path>) -> Result<Vec<Reference>> {
        let mut refs = Vec::new();
        if let Source::Analytic(m) = self {
            refs.push(match m {
                Model::Radial(r) => Reference::Circles { centers: r.centers().to_vec(), radius: r.radius() },
                _ => Reference::Points { points: m.basin_centers() },
            });
        }
        if let Some(path) = extra {
            refs.extend(load_references(path)?);
        }
        Ok(refs)
    }

    /// Basin centres used to group endpoints.
    pub fn centers(&self, refs: &[Reference]) -> Vec<Vec<f64>> {
        match self {
            Source::Analytic(m) => m.basin_centers(),
            Source::Learned(_) => refs
                .iter()
                .find_map(|r| match r {
                    Reference::Points { points } => Some(points.clone()),
                    Reference::Circles { centers, .. } => Some(centers.clone()),
                    _ => None,
                })
                .unwrap_or_default(),
        }
    }

    /// Target samples drawn for plotting backgrounds.
    pub fn background(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        match self {
            Source::Analytic(m) => sample_model(m, n, seed),
            Source::Learned(_) => Vec::new(),
        }
    }

    /// Mean squared distances to and along the principal axis of the nearest component.
    pub fn axis_spread(&self, points: &[Vec<f64>]) -> Result<Option<AxisSpread>> {
        let Source::Analytic(Model::GaussianMixture(gm)) = self else {
            return Ok(None);
        };
        if points.is_empty() {
            return Ok(None);
        }
        let (mut across, mut along) = (0.0, 0.0);
        for p in points {
            let o = axis_offset(gm, p)?;
            across += o.across * o.across;
            along += o.along * o.along;
        }
        let n = points.len() as f64;
        Ok(Some(AxisSpread { across_mean_sq: across / n, along_mean_sq: along / n }))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AxisSpread {
    pub across_mean_sq: f64,
    pub along_mean_sq: f64,
}

fn load_references(path: &Path) -> Result<Vec<Reference>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let list = match value {
        Value::Object(mut o) => o.remove("references").ok_or_else(|| Failure::bad_input("references file has no 'references' list"))?,
        v => v,
    };
    Ok(serde_json::from_value(list).with_context(|| format!("decoding references in {}", path.display()))?)
}
