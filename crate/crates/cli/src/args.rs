use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mad_core::nnscore::{Activation, TrainConfig};
use mad_core::sampler::{DEFAULT_RHO, DEFAULT_SIGMA_MAX, DEFAULT_SIGMA_MIN, DEFAULT_STEPS};
use mad_core::{Derivative, MadParams, TimeSchedule};

/// Standard and extended-score inference for diffusion models on toy targets.
#[derive(Debug, Parser)]
#[command(name = "mad", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the JSON of a built-in analytic model.
    Model(ModelArgs),
    /// Draw a dataset from a built-in generator or a model file.
    Dataset(DatasetArgs),
    /// Run standard or extended-score inference over a batch of seeds.
    Sample(SampleArgs),
    /// Fit the MLP denoiser to a points file.
    Train(TrainArgs),
    /// Summarize extended-score inference over an (a, b, p) grid.
    Sweep(SweepArgs),
    /// Cross-check every closed form against brute-force oracles.
    Validate(ValidateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Model(_) => "model",
            Command::Dataset(_) => "dataset",
            Command::Sample(_) => "sample",
            Command::Train(_) => "train",
            Command::Sweep(_) => "sweep",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Five Gaussians on the first axis times a point mass on the second.
    LineMixture,
    /// 21 randomly rotated elongated planar Gaussians.
    Tilted,
    /// Gaussian rings around random planar centres.
    Radial,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub kind: ModelKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep ring centres at least one diameter apart.
    #[arg(long)]
    pub min_spacing: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKindArg {
    LineMixture,
    Tilted,
    Radial,
    /// Noisy points on a segment along the first axis.
    Line,
    /// Noisy points on a circle in the first two coordinates.
    Circle,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct DatasetArgs {
    #[arg(long, value_enum, required_unless_present = "model", conflicts_with = "model")]
    pub kind: Option<DatasetKindArg>,
    /// Sample this model file instead of a built-in generator.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 1.0)]
    pub half_length: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Also write the reference sets endpoints should approach.
    #[arg(long)]
    #[serde(skip)]
    pub references_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScheduleArgs {
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_SIGMA_MIN)]
    pub sigma_min: f64,
    #[arg(long, default_value_t = DEFAULT_SIGMA_MAX)]
    pub sigma_max: f64,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
}

impl ScheduleArgs {
    pub fn build(&self) -> mad_core::Result<TimeSchedule> {
        TimeSchedule::edm(self.steps, self.sigma_min, self.sigma_max, self.rho)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SourceArgs {
    /// Analytic model JSON.
    #[arg(long, required_unless_present = "checkpoint", conflicts_with = "checkpoint")]
    pub model: Option<PathBuf>,
    /// Trained denoiser checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// JSON list of reference sets (or an object with a `references` list).
    #[arg(long)]
    pub references: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeArg {
    /// Forward difference in sigma with relative step `--delta`.
    Fd,
    /// The oracle's exact sigma derivative.
    Analytic,
}

impl From<DerivativeArg> for Derivative {
    fn from(d: DerivativeArg) -> Self {
        match d {
            DerivativeArg::Fd => Derivative::ForwardDifference,
            DerivativeArg::Analytic => Derivative::Analytic,
        }
    }
}

/// Forward-difference step for analytic models when `--delta` is absent.
pub const ANALYTIC_DELTA: f64 = 1e-4;
/// Forward-difference step for learned oracles when `--delta` is absent.
pub const LEARNED_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorrectionArgs {
    /// Relative forward-difference step; defaults to 1e-4 for models and 1e-3 for checkpoints.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub m_guard: f64,
    #[arg(long, value_enum, default_value_t = DerivativeArg::Fd)]
    pub derivative: DerivativeArg,
}

impl CorrectionArgs {
    pub fn params(&self, a: f64, b: f64, p: f64, learned: bool) -> MadParams {
        let delta = self.delta.unwrap_or(if learned { LEARNED_DELTA } else { ANALYTIC_DELTA });
        MadParams { a, b, p, delta, m_guard: self.m_guard, derivative: self.derivative.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Standard,
    Mad,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct SampleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value_t = Mode::Mad)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[command(flatten)]
    pub correction: CorrectionArgs,
    /// Number of seeds; seed i runs from `--seed + i`.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write full iterates for the first this-many seeds.
    #[arg(long, default_value_t = 0)]
    pub trajectories: usize,
    /// Write an SVG scatter of endpoints over the target histogram.
    #[arg(long)]
    pub svg: bool,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationArg {
    Silu,
    Tanh,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct TrainArgs {
    /// Points CSV to fit.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 2e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.02)]
    pub final_lr_fraction: f64,
    /// Hidden layer widths.
    #[arg(long, value_delimiter = ',', default_values_t = [128, 128, 128])]
    pub hidden: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ActivationArg::Silu)]
    pub activation: ActivationArg,
    #[arg(long, default_value_t = DEFAULT_SIGMA_MIN)]
    pub sigma_min: f64,
    #[arg(long, default_value_t = DEFAULT_SIGMA_MAX)]
    pub sigma_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2048)]
    pub validation_size: usize,
    /// Checkpoint path.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Training-log CSV path.
    #[arg(long)]
    #[serde(skip)]
    pub log: Option<PathBuf>,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            iterations: self.iterations,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            final_lr_fraction: self.final_lr_fraction,
            hidden: self.hidden.clone(),
            activation: match self.activation {
                ActivationArg::Silu => Activation::Silu,
                ActivationArg::Tanh => Activation::Tanh,
            },
            sigma_min: self.sigma_min,
            sigma_max: self.sigma_max,
            seed: self.seed,
            validation_size: self.validation_size,
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long = "a", value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub a_grid: Vec<f64>,
    #[arg(long = "b", value_delimiter = ',', default_values_t = [1.0, 5.0, 30.0])]
    pub b_grid: Vec<f64>,
    #[arg(long = "p", value_delimiter = ',', default_values_t = [1.3, 2.0, 4.0])]
    pub p_grid: Vec<f64>,
    #[command(flatten)]
    pub correction: CorrectionArgs,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ValidateArgs {
    /// Report path; printed to stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Offset added to every closed-form value (negative-control hook).
    #[arg(long, hide = true)]
    pub perturb: Option<f64>,
}
