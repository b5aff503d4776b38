//! The `sample` and `sweep` subcommands.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use mad_core::sampler::metrics::{batch_summary, BatchSummary, Reference};
use mad_core::xscore::StepCoefficients;
use mad_core::{Method, Sampler, TimeSchedule};

use crate::args::{Mode, SampleArgs, SweepArgs};
use crate::failure::Failure;
use crate::io::{self, num};
use crate::source::{AxisSpread, OracleInfo, Source};
use crate::svg;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrectionRange {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub m_min: f64,
    pub m_max: f64,
}

impl CorrectionRange {
    fn of(coefficients: &[StepCoefficients]) -> Option<Self> {
        if coefficients.is_empty() {
            return None;
        }
        let fold = |f: fn(&StepCoefficients) -> f64| {
            coefficients.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (gamma_min, gamma_max) = fold(|c| c.gamma);
        let (m_min, m_max) = fold(|c| c.m);
        Some(Self { gamma_min, gamma_max, m_min, m_max })
    }
}

/// Everything measured about one batch of endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct BatchStats {
    pub count: usize,
    pub summary: BatchSummary,
    /// Mean over basins holding at least two endpoints of the RMS coordinate std.
    pub basin_spread: Option<f64>,
    pub axis: Option<AxisSpread>,
    pub correction: Option<CorrectionRange>,
}

pub fn seeds(first: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| first + i).collect()
}

fn basin_spread(summary: &BatchSummary) -> Option<f64> {
    let spreads: Vec<f64> = summary
        .basins
        .iter()
        .filter(|b| b.moments.count >= 2)
        .map(|b| {
            let s = &b.moments.std;
            (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt()
        })
        .collect();
    (!spreads.is_empty()).then(|| spreads.iter().sum::<f64>() / spreads.len() as f64)
}

/// Runs `method` for every seed and summarizes the endpoints.
pub fn run_batch(
    source: &Source,
    schedule: &TimeSchedule,
    method: Method,
    seeds: &[u64],
    refs: &[Reference],
) -> Result<(Vec<Vec<f64>>, BatchStats)> {
    let sampler = Sampler::new(source.oracle(), schedule, method)?.with_history(false);
    let mut endpoints = Vec::with_capacity(seeds.len());
    for (seed, r) in seeds.iter().zip(sampler.run_batch(seeds)) {
        endpoints.push(r.with_context(|| format!("trajectory for seed {seed}"))?.endpoint);
    }
    let summary = batch_summary(&endpoints, &source.centers(refs), refs);
    let stats = BatchStats {
        count: endpoints.len(),
        basin_spread: basin_spread(&summary),
        axis: source.axis_spread(&endpoints)?,
        correction: match method {
            Method::Mad(_) => CorrectionRange::of(sampler.coefficients()),
            Method::Standard => None,
        },
        summary,
    };
    Ok((endpoints, stats))
}

#[derive(Serialize)]
struct SampleSummary<'a> {
    schema_version: u32,
    artifact: &'static str,
    config: &'a SampleArgs,
    oracle: OracleInfo,
    method: Method,
    times: &'a [f64],
    references: &'a [Reference],
    #[serde(flatten)]
    stats: BatchStats,
}

pub fn sample(args: &SampleArgs) -> Result<()> {
    if args.n == 0 {
        return Err(Failure::bad_input("--n must be positive").into());
    }
    let schedule = args.schedule.build()?;
    let source = Source::load(&args.source)?;
    let method = match args.mode {
        Mode::Standard => Method::Standard,
        Mode::Mad => {
            let params = args.correction.params(args.a, args.b, args.p, source.is_learned());
            params.validate()?;
            Method::Mad(params)
        }
    };
    let refs = source.references(args.source.references.as_deref())?;
    let seeds = seeds(args.seed, args.n);
    let (endpoints, stats) = run_batch(&source, &schedule, method, &seeds, &refs)?;

    let out = &args.out;
    io::write(&out.join("endpoints.csv"), &io::points_csv("endpoints", args, Some(&seeds), &endpoints)?)?;
    if args.trajectories > 0 {
        write_trajectories(&out.join("trajectories.csv"), args, &source, &schedule, method, &seeds)?;
    }
    if args.svg {
        let background = source.background(4 * args.n, args.seed);
        let title = format!("{} endpoints, n = {}", method.name(), args.n);
        io::write(&out.join("endpoints.svg"), &svg::scatter(&title, &endpoints, &background))?;
    }
    let summary = SampleSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        artifact: "sample_summary",
        config: args,
        oracle: source.info(),
        method,
        times: schedule.times(),
        references: &refs,
        stats,
    };
    io::write_json(&out.join("summary.json"), &summary)
}

fn write_trajectories(
    path: &Path,
    args: &SampleArgs,
    source: &Source,
    schedule: &TimeSchedule,
    method: Method,
    seeds: &[u64],
) -> Result<()> {
    let sampler = Sampler::new(source.oracle(), schedule, method)?.with_history(true);
    let dim = source.oracle().dim();
    let mut columns = vec!["seed".to_string(), "step".to_string(), "t".to_string()];
    columns.extend(io::coordinate_names(dim));
    let mut rows = Vec::new();
    for &seed in seeds.iter().take(args.trajectories) {
        let traj = sampler.run(seed).with_context(|| format!("trajectory for seed {seed}"))?;
        for (i, (x, t)) in traj.iterates.iter().zip(schedule.times()).enumerate() {
            let mut row = vec![seed.to_string(), i.to_string(), num(*t)];
            row.extend(x.iter().map(|&v| num(v)));
            rows.push(row);
        }
    }
    io::write(path, &io::table("trajectories", args, &columns, rows)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub mode: &'static str,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub p: Option<f64>,
    pub status: &'static str,
    pub error: Option<String>,
    pub stats: Option<BatchStats>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    schema_version: u32,
    artifact: &'static str,
    config: &'a SweepArgs,
    oracle: OracleInfo,
    references: &'a [Reference],
    rows: &'a [SweepRow],
}

fn sweep_row(source: &Source, schedule: &TimeSchedule, method: Method, seeds: &[u64], refs: &[Reference]) -> SweepRow {
    let (a, b, p) = match method {
        Method::Mad(m) => (Some(m.a), Some(m.b), Some(m.p)),
        Method::Standard => (None, None, None),
    };
    let (status, error, stats) = match run_batch(source, schedule, method, seeds, refs) {
        Ok((_, stats)) => ("ok", None, Some(stats)),
        Err(e) => ("failed", Some(format!("{e:#}")), None),
    };
    SweepRow { mode: method.name(), a, b, p, status, error, stats }
}

/// The standard-score baseline first, then every grid cell; failed cells are recorded, not fatal.
pub fn sweep(args: &SweepArgs) -> Result<()> {
    if args.n == 0 || args.a_grid.is_empty() || args.b_grid.is_empty() || args.p_grid.is_empty() {
        return Err(Failure::bad_input("--n and every grid must be non-empty").into());
    }
    let schedule = args.schedule.build()?;
    let source = Source::load(&args.source)?;
    let mut methods = vec![Method::Standard];
    for &a in &args.a_grid {
        for &b in &args.b_grid {
            for &p in &args.p_grid {
                let params = args.correction.params(a, b, p, source.is_learned());
                params.validate()?;
                methods.push(Method::Mad(params));
            }
        }
    }
    let refs = source.references(args.source.references.as_deref())?;
    let seeds = seeds(args.seed, args.n);
    let rows: Vec<SweepRow> = methods.iter().map(|&m| sweep_row(&source, &schedule, m, &seeds, &refs)).collect();

    io::write(&args.out.join("sweep.csv"), &sweep_csv(args, refs.len(), &rows)?)?;
    let report = SweepReport {
        schema_version: SUMMARY_SCHEMA_VERSION,
        artifact: "sweep_report",
        config: args,
        oracle: source.info(),
        references: &refs,
        rows: &rows,
    };
    io::write_json(&args.out.join("sweep.json"), &report)
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn sweep_csv(args: &SweepArgs, n_refs: usize, rows: &[SweepRow]) -> Result<String> {
    let mut columns: Vec<String> = ["mode", "a", "b", "p", "status", "count"].map(String::from).to_vec();
    columns.extend((1..=n_refs).map(|k| format!("rms_ref{k}")));
    columns.extend(
        ["basin_spread", "across_mean_sq", "along_mean_sq", "m_min", "m_max", "error"].map(String::from),
    );
    let lines = rows.iter().map(|r| {
        let mut row = vec![r.mode.to_string(), opt(r.a), opt(r.b), opt(r.p), r.status.to_string()];
        match &r.stats {
            Some(s) => {
                row.push(s.count.to_string());
                row.extend(s.summary.reference_rms.iter().map(|&v| num(v)));
                row.push(opt(s.basin_spread));
                row.push(opt(s.axis.map(|a| a.across_mean_sq)));
                row.push(opt(s.axis.map(|a| a.along_mean_sq)));
                row.push(opt(s.correction.map(|c| c.m_min)));
                row.push(opt(s.correction.map(|c| c.m_max)));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 6 + n_refs)),
        }
        row.push(r.error.as_deref().map(quoted).unwrap_or_default());
        row
    });
    io::table("sweep", args, &columns, lines)
}
