//! Command-line front end for `mcdimpute`: grid reproduction, training and imputation.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use mcdimpute::eval::CellStatus;
use mcdimpute::models::ModelKind;

pub use commands::{cmd_impute, cmd_reproduce, cmd_train, ImputeOutputs, ReproduceOutputs};
pub use config::{parse_config, DatasetSource, ExperimentArgs, ExperimentConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "mcdimpute",
    version,
    about = "Autoencoder imputation with Monte Carlo dropout"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the cross-validated grid and write report.txt and report.kv to --out (default results/).
    Reproduce(ExperimentArgs),
    /// Train one model on the first dataset and save it to --out (default model.txt).
    Train(ExperimentArgs),
    /// Fill the missing cells of a CSV with one model kind (default mcd-vae); writes --out
    /// (default imputed.csv) and, for MC kinds, a `.std.csv` side file of per-cell deviations.
    Impute {
        /// CSV with missing cells.
        input: PathBuf,
        /// Model file written by `train`. Without it a model is trained first.
        #[arg(long)]
        model_file: Option<PathBuf>,
        #[command(flatten)]
        args: ExperimentArgs,
    },
}

fn execute(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Reproduce(args) => {
            let cfg = parse_config(&args, true)?;
            let out = cmd_reproduce(&cfg)?;
            commands::emit(std::fs::read(&out.text).unwrap_or_default().as_slice());
            eprintln!("wrote {} and {}", out.text.display(), out.kv.display());
            let diverged = out
                .report
                .cells
                .iter()
                .any(|c| matches!(c.status, CellStatus::Failed(_)));
            Ok(if diverged { 3 } else { 0 })
        }
        Command::Train(args) => {
            let cfg = parse_config(&args, true)?;
            let path = cmd_train(&cfg)?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::Impute {
            input,
            model_file,
            args,
        } => {
            let mut cfg = parse_config(&args, false)?;
            if cfg.models == ModelKind::ALL {
                cfg.models = vec![ModelKind::McdVae];
            }
            let out = cmd_impute(&cfg, &input, model_file.as_deref())?;
            eprintln!(
                "imputed {} cells into {}",
                out.missing_cells,
                out.csv.display()
            );
            if let Some(p) = out.std {
                eprintln!("wrote {}", p.display());
            }
            Ok(0)
        }
    }
}

/// Parses `argv` and runs the selected command, returning the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 numeric divergence.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
