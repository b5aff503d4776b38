//! `mad`: build toy models, train a denoiser, run standard and extended-score
//! inference, sweep hyperparameters and validate closed forms.
//!
//! Exit status: 0 success, 2 validation failure, 3 numerical failure, 4 bad input.
//! Failures print `{code, message, context}` JSON on stderr. `MAD_THREADS`
//! bounds the worker pool.

mod args;
mod data;
mod failure;
mod io;
mod run;
mod source;
mod svg;
mod train;

use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use mad_core::validation::run_validation;

use args::{Cli, Command, ValidateArgs};
use failure::{error_json, Failure, Status};

fn validate(args: &ValidateArgs) -> Result<()> {
    let report = run_validation(args.perturb)?;
    for c in &report.checks {
        eprintln!(
            "[{}] {:<48} observed {:.3e}  tolerance {:.1e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.observed,
            c.tolerance
        );
    }
    match &args.out {
        Some(path) => io::write_json(path, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    if !report.passed {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        return Err(Failure::validation(format!("{failed} of {} checks failed", report.checks.len())).into());
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("MAD_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::bad_input(format!("MAD_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::bad_input(format!("cannot size the worker pool: {e}")))?;
    Ok(())
}

fn dispatch(command: &Command) -> Result<()> {
    configure_threads()?;
    match command {
        Command::Model(a) => data::model(a),
        Command::Dataset(a) => data::dataset(a),
        Command::Sample(a) => run::sample(a),
        Command::Train(a) => train::train(a),
        Command::Sweep(a) => run::sweep(a),
        Command::Validate(a) => validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let body = json!({
                "code": Status::BadInput.label(),
                "message": e.kind().to_string(),
                "context": { "usage": e.to_string() },
            });
            eprintln!("{body}");
            return ExitCode::from(Status::BadInput as u8);
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(cli.command.name(), &e));
            ExitCode::from(failure::classify(&e) as u8)
        }
    }
}
