use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DegenerateGaussian, DiracMixture, GaussianMixture, Model, ProductModel, RadialGaussianMixture};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDef {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Row-major `d × d`.
    pub covariance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDef {
    pub weight: f64,
    pub location: Vec<f64>,
}

/// Serialized form of a [`Model`], discriminated by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelDef {
    GaussianMixture {
        dim: usize,
        components: Vec<ComponentDef>,
    },
    DiracMixture {
        dim: usize,
        atoms: Vec<AtomDef>,
    },
    DegenerateGaussian {
        active_mean: Vec<f64>,
        active_covariance: Vec<f64>,
        degenerate_dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
    Product {
        factors: Vec<ModelDef>,
    },
    Radial {
        centers: Vec<Vec<f64>>,
        radius: f64,
        variance: f64,
        quadrature_points: usize,
    },
}

/// Top-level model file: `{"schema_version": 1, "kind": ..., ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub model: ModelDef,
}

impl ModelDef {
    pub fn build(&self) -> Result<Model> {
        Ok(match self {
            ModelDef::GaussianMixture { dim, components } => GaussianMixture::new(
                *dim,
                components
                    .iter()
                    .map(|c| (c.weight, c.mean.clone(), c.covariance.clone()))
                    .collect(),
            )?
            .into(),
            ModelDef::DiracMixture { dim, atoms } => {
                if atoms.iter().any(|a| a.location.len() != *dim) {
                    return Err(Error::InvalidModel(format!("atom locations must have length {dim}")));
                }
                DiracMixture::new(
                    atoms.iter().map(|a| a.weight).collect(),
                    atoms.iter().map(|a| a.location.clone()).collect(),
                )?
                .into()
            }
            ModelDef::DegenerateGaussian {
                active_mean,
                active_covariance,
                degenerate_dim,
                rotation,
                offset,
            } => DegenerateGaussian::new(
                active_mean.clone(),
                active_covariance.clone(),
                *degenerate_dim,
                rotation.clone(),
                offset.clone(),
            )?
            .into(),
            ModelDef::Product { factors } => {
                ProductModel::new(factors.iter().map(ModelDef::build).collect::<Result<_>>()?)?.into()
            }
            ModelDef::Radial {
                centers,
                radius,
                variance,
                quadrature_points,
            } => RadialGaussianMixture::new(centers.clone(), *radius, *variance, *quadrature_points)?.into(),
        })
    }
}

impl Model {
    pub fn to_def(&self) -> ModelDef {
        match self {
            Model::GaussianMixture(m) => ModelDef::GaussianMixture {
                dim: m.dim(),
                components: m
                    .components()
                    .iter()
                    .map(|c| ComponentDef {
                        weight: c.weight,
                        mean: c.mean.clone(),
                        covariance: c.covariance.clone(),
                    })
                    .collect(),
            },
            Model::DiracMixture(m) => ModelDef::DiracMixture {
                dim: m.dim(),
                atoms: m
                    .weights()
                    .iter()
                    .zip(m.atoms())
                    .map(|(w, a)| AtomDef { weight: *w, location: a.clone() })
                    .collect(),
            },
            Model::DegenerateGaussian(m) => ModelDef::DegenerateGaussian {
                active_mean: m.active_mean().to_vec(),
                active_covariance: m.active_covariance().to_vec(),
                degenerate_dim: m.degenerate_dim(),
                rotation: m.rotation().map(<[f64]>::to_vec),
                offset: m.offset().map(<[f64]>::to_vec),
            },
            Model::Product(m) => ModelDef::Product {
                factors: m.factors().iter().map(Model::to_def).collect(),
            },
            Model::Radial(m) => ModelDef::Radial {
                centers: m.centers().to_vec(),
                radius: m.radius(),
                variance: m.variance(),
                quadrature_points: m.quadrature_points(),
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            model: self.to_def(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(Error::Schema(format!("unsupported model schema_version {v}"))),
            None => return Err(Error::Schema("missing schema_version".into())),
        }
        let file: ModelFile = serde_json::from_value(value)?;
        file.model.build()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
