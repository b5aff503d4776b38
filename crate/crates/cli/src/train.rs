//! The `train` subcommand.

use anyhow::Result;

use mad_core::nnscore::{log_csv, train_denoiser, Checkpoint, ValidationRecord};

use crate::args::TrainArgs;
use crate::io;

pub fn train(args: &TrainArgs) -> Result<()> {
    let config = args.config();
    config.validate()?;
    let data = io::read_points(&args.data)?;
    let outcome = train_denoiser(&config, &data)?;
    let mut ck = Checkpoint::from_denoiser(&outcome.denoiser);
    ck.validation = Some(ValidationRecord { seed: config.seed, size: config.validation_size, loss: outcome.validation_loss });
    ck.train_config = Some(config);
    io::write(&args.out, &ck.to_json()?)?;
    if let Some(path) = &args.log {
        let mut text = io::comment_line("train_log", args)?;
        text.push_str(&log_csv(&outcome.log));
        io::write(path, &text)?;
    }
    Ok(())
}
