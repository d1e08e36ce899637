use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use countfit::commands::{self, Output};
use countfit::error::exit;
use countfit::freqfile;
use countfit::modelspec::ModelSpec;
use countfit::CliError;
use countfit_core::gof::DEFAULT_POOL_THRESHOLD;
use countfit_core::Family;

const SPEC_HELP: &str = "Model spec: family:key=value,… with families poisson (m), geom (p), \
nb (m,k or p,k), zip (pi,m), zig (pi,p), zinb (pi,m,k or pi,p,k), hp (pi,m), hg (pi,p), \
hnb (pi,m,k or pi,p,k). Example: zig:pi=0.3,p=0.4";

/// Fit over-dispersed count distributions to frequency tables.
#[derive(Debug, Parser)]
#[command(name = "countfit", version, about, after_help = SPEC_HELP)]
struct Cli {
    /// Suppress status messages on stderr
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Frequency CSV ("count,frequency" rows; '#' starts a comment)
    data: PathBuf,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one family and test its goodness of fit
    Fit {
        #[command(flatten)]
        input: InputArgs,
        /// nb, zig, hg, geom or poisson
        #[arg(long)]
        model: Family,
        /// Tail bins with expected frequency below this are pooled
        #[arg(long, default_value_t = DEFAULT_POOL_THRESHOLD, value_parser = positive)]
        pool_threshold: f64,
    },
    /// Fit several families and rank them by AIC
    Compare {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated families, e.g. nb,zig,hg
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        models: Vec<Family>,
        #[arg(long, default_value_t = DEFAULT_POOL_THRESHOLD, value_parser = positive)]
        pool_threshold: f64,
    },
    /// Observed and fitted expected frequencies as CSV
    Figure {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        models: Vec<Family>,
    },
    /// Draw a sample from a model and write it as a frequency CSV
    Simulate {
        #[arg(long, help = SPEC_HELP)]
        model: ModelSpec,
        /// Sample size
        #[arg(long, value_parser = at_least_one)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated simulate-and-fit experiment, reported as JSON
    Recover {
        #[arg(long, help = SPEC_HELP)]
        model: ModelSpec,
        /// Sample size per replicate
        #[arg(long, value_parser = at_least_one)]
        n: usize,
        /// Number of replicates
        #[arg(long, default_value_t = 100, value_parser = at_least_one)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("{s:?} is not a positive number")),
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("{s:?} is not a positive integer")),
    }
}

fn emit(text: &str, out: Option<&Path>, quiet: bool) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::WriteOutput {
                path: path.to_owned(),
                source,
            })?;
            if !quiet {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(CliError::Stdout)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let quiet = cli.quiet;
    let report = |out: Output, path: Option<&Path>| -> Result<(), CliError> {
        emit(&out.text, path, quiet)?;
        out.error.map_or(Ok(()), Err)
    };
    match cli.command {
        Command::Fit {
            input,
            model,
            pool_threshold,
        } => {
            let file = freqfile::read(&input.data)?;
            report(
                commands::fit(&file, model, pool_threshold),
                input.out.as_deref(),
            )
        }
        Command::Compare {
            input,
            models,
            pool_threshold,
        } => {
            let file = freqfile::read(&input.data)?;
            report(
                commands::compare(&file, &models, pool_threshold),
                input.out.as_deref(),
            )
        }
        Command::Figure { input, models } => {
            let file = freqfile::read(&input.data)?;
            emit(
                &commands::figure(&file, &models)?,
                input.out.as_deref(),
                quiet,
            )
        }
        Command::Simulate {
            model,
            n,
            seed,
            out,
        } => emit(&commands::simulate(&model, n, seed), out.as_deref(), quiet),
        Command::Recover {
            model,
            n,
            reps,
            seed,
            out,
        } => emit(
            &commands::recover(&model, n, reps, seed),
            out.as_deref(),
            quiet,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS),
        Err(e) => {
            eprintln!("countfit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
