//! The `model` and `dataset` subcommands.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use mad_core::sampler::metrics::Reference;
use mad_core::synthdata::{self, DatasetKind, DatasetSpec, Manifold};
use mad_core::Model;

use crate::args::{DatasetArgs, DatasetKindArg, ModelArgs, ModelKind};
use crate::failure::Failure;
use crate::io;

fn model_kind(kind: ModelKind, min_spacing: bool) -> DatasetKind {
    match kind {
        ModelKind::LineMixture => DatasetKind::LineMixture,
        ModelKind::Tilted => DatasetKind::tilted(),
        ModelKind::Radial => match DatasetKind::radial() {
            DatasetKind::RadialRings { centers, box_half, radius, variance, quadrature_points, .. } => {
                DatasetKind::RadialRings { centers, box_half, radius, variance, min_spacing, quadrature_points }
            }
            other => other,
        },
    }
}

/// Model JSON with the generating config alongside.
pub fn model(args: &ModelArgs) -> Result<()> {
    let spec = DatasetSpec::new(model_kind(args.kind, args.min_spacing), 1, args.seed);
    let model = synthdata::build_model(&spec)?.expect("built-in kinds are analytic");
    let mut value: Value = serde_json::from_str(&model.to_json()?)?;
    value["config"] = serde_json::to_value(args)?;
    io::write_json(&args.out, &value)
}

#[derive(Serialize)]
struct ReferenceFile<'a> {
    schema_version: u32,
    config: &'a DatasetArgs,
    references: Vec<Reference>,
}

pub fn dataset(args: &DatasetArgs) -> Result<()> {
    if args.n == 0 {
        return Err(Failure::bad_input("--n must be positive").into());
    }
    let (points, refs) = match (&args.kind, &args.model) {
        (None, Some(path)) => {
            let model = Model::load(path).with_context(|| format!("loading model {}", path.display()))?;
            let refs = vec![Reference::Points { points: model.basin_centers() }];
            (synthdata::sample_model(&model, args.n, args.seed), refs)
        }
        (Some(kind), None) => {
            let kind = match kind {
                DatasetKindArg::LineMixture => model_kind(ModelKind::LineMixture, false),
                DatasetKindArg::Tilted => model_kind(ModelKind::Tilted, false),
                DatasetKindArg::Radial => model_kind(ModelKind::Radial, false),
                DatasetKindArg::Line => DatasetKind::ManifoldNoisy {
                    manifold: Manifold::Line { half_length: args.half_length },
                    ambient_dim: args.dim,
                    noise_std: args.noise,
                },
                DatasetKindArg::Circle => DatasetKind::ManifoldNoisy {
                    manifold: Manifold::Circle { radius: args.radius },
                    ambient_dim: args.dim,
                    noise_std: args.noise,
                },
            };
            let spec = DatasetSpec::new(kind, args.n, args.seed);
            let model = synthdata::build_model(&spec)?;
            let refs = synthdata::references(&spec, model.as_ref());
            (synthdata::sample_dataset(&spec)?, refs)
        }
        _ => return Err(Failure::bad_input("exactly one of --kind or --model is required").into()),
    };
    io::write(&args.out, &io::points_csv("dataset", args, None, &points)?)?;
    if let Some(path) = &args.references_out {
        io::write_json(path, &ReferenceFile { schema_version: io::CSV_SCHEMA_VERSION, config: args, references: refs })?;
    }
    Ok(())
}
