use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Dense, Mlp};
use super::train::TrainConfig;
use super::MlpDenoiser;
use crate::error::{Error, Result};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Loss on the fixed validation batch regenerated from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub seed: u64,
    pub size: usize,
    pub loss: f64,
}

/// On-disk form of a trained denoiser. Floats are written in shortest
/// round-trip decimal, so loading restores every parameter bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub dim: usize,
    pub activation: Activation,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_data: f64,
    pub layers: Vec<LayerRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_config: Option<TrainConfig>,
}

impl Checkpoint {
    pub fn from_denoiser(model: &MlpDenoiser) -> Self {
        Self {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            dim: model.dim,
            activation: model.net.activation,
            sigma_min: model.sigma_min,
            sigma_max: model.sigma_max,
            sigma_data: model.sigma_data,
            layers: model
                .net
                .layers
                .iter()
                .map(|l| LayerRecord {
                    inputs: l.inputs(),
                    outputs: l.outputs(),
                    weight: l.weight.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
            validation: None,
            train_config: None,
        }
    }

    pub fn to_denoiser(&self) -> Result<MlpDenoiser> {
        if self.layers.is_empty() {
            return Err(Error::Schema("checkpoint has no layers".into()));
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            if l.weight.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::Schema(format!("layer {i} arrays do not match its shape")));
            }
            if i > 0 && self.layers[i - 1].outputs != l.inputs {
                return Err(Error::Schema(format!("layer {i} input width does not chain")));
            }
            if l.weight.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::Schema(format!("layer {i} has non-finite parameters")));
            }
            layers.push(Dense {
                weight: Array2::from_shape_vec((l.outputs, l.inputs), l.weight.clone())
                    .map_err(|e| Error::Schema(e.to_string()))?,
                bias: Array1::from(l.bias.clone()),
            });
        }
        MlpDenoiser::new(Mlp { layers, activation: self.activation }, self.dim, self.sigma_min, self.sigma_max, self.sigma_data)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == CHECKPOINT_SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(Error::Schema(format!("unsupported checkpoint schema_version {v}"))),
            None => return Err(Error::Schema("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnscore::Denoiser;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_model() -> MlpDenoiser {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let net = Mlp::new(&[3, 9, 9, 2], Activation::Silu, false, &mut rng);
        MlpDenoiser::new(net, 2, 0.002, 80.0, 0.37).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let model = random_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        Checkpoint::from_denoiser(&model).save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap().to_denoiser().unwrap();
        assert_eq!(back, model);
        for sigma in [0.002, 0.3, 80.0] {
            let x = [0.123456789, -9.87654321];
            let a = model.denoise(sigma, &x).unwrap();
            let b = back.denoise(sigma, &x).unwrap();
            assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn wrong_version_is_a_schema_error() {
        let mut ck = Checkpoint::from_denoiser(&random_model());
        ck.schema_version = 2;
        let text = serde_json::to_string(&ck).unwrap();
        assert!(matches!(Checkpoint::from_json(&text), Err(Error::Schema(_))));
        assert!(matches!(Checkpoint::from_json("{\"dim\": 2}"), Err(Error::Schema(_))));
    }

    #[test]
    fn corrupt_shapes_are_rejected() {
        let mut ck = Checkpoint::from_denoiser(&random_model());
        ck.layers[1].weight.pop();
        assert!(matches!(ck.to_denoiser(), Err(Error::Schema(_))));
        assert!(Checkpoint::from_json("not json").is_err());
    }
}
