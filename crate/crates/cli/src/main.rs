//! `gbmul`: classify vector systems, assemble and certify generalized
//! Bessel multipliers, run randomized check suites, and replay
//! perturbation schedules.

use clap::{Parser, Subcommand};
use gbmul::ToleranceConfig;
use gbmul_cli::commands::{
    self, CliError, CommandOutput, MultiplierAction, EXIT_USAGE,
};
use gbmul_cli::config::{SizeRange, SweepConfig};
use gbmul_cli::suites::SuiteKind;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gbmul",
    version,
    about = "Generalized Bessel multipliers: certification and reports",
    after_help = "Exit codes: 0 all checks pass, 1 certified violation, 2 bad input or usage."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Absolute tolerance for exact identities (scaled by instance size)
    #[arg(long, global = true, value_name = "X")]
    tol_eq_abs: Option<f64>,

    /// Relative slack granted to one-sided bounds
    #[arg(long, global = true, value_name = "X")]
    tol_bound_slack: Option<f64>,

    /// Relative eigenvalue threshold for rank decisions
    #[arg(long, global = true, value_name = "X")]
    tol_rank_tol: Option<f64>,

    /// sigma_min/sigma_max floor below which a matrix counts as singular
    #[arg(long, global = true, value_name = "X")]
    tol_invert_floor: Option<f64>,

    /// Write the report to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Emit CSV rows instead of JSON (check and perturb only)
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a sequence file: kind, frame bounds, dual summaries
    Classify {
        /// Sequence JSON: {"dim": d, "vectors": [[[re,im], ...], ...]}
        file: PathBuf,
    },
    /// Build a multiplier bundle and run actions against it
    Multiplier {
        /// Bundle JSON: {"symbol": ..., "synthesis": ..., "analysis": ...}
        file: PathBuf,
        /// Comma-separated actions to run
        #[arg(long, value_delimiter = ',', default_value = "build")]
        actions: Vec<MultiplierAction>,
        /// Vector JSON ([[re,im], ...]) for the apply action
        #[arg(long, value_name = "PATH")]
        vector: Option<PathBuf>,
    },
    /// Run a randomized check suite over seeded draws
    Check {
        /// One of: norm-bounds, bounded-below, identity-perturbation,
        /// riesz-lower, composition, inversion, derived-lower-bound,
        /// riesz-detection, frame-perturbation, convergence
        suite: String,
        /// Hilbert space dimensions, inclusive range `lo..hi` or one value
        #[arg(long, default_value = "2..8")]
        dims: String,
        /// Sequence lengths, inclusive range `lo..hi` or one value
        #[arg(long, default_value = "2..12")]
        counts: String,
        /// Number of random draws
        #[arg(long, default_value_t = 200)]
        draws: u64,
        /// Master seed; each draw gets its own derived stream
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Re-run a single draw index with full certificate detail
        #[arg(long, value_name = "DRAW")]
        replay: Option<u64>,
    },
    /// Run a perturbation schedule from an experiment file
    Perturb {
        /// Experiment JSON: bundle fields plus "schedule" and "norms"
        file: PathBuf,
    },
}

fn tolerances(cli: &Cli) -> Result<ToleranceConfig, CliError> {
    let mut tol = ToleranceConfig::default();
    if let Some(v) = cli.tol_eq_abs {
        tol.eq_abs = v;
    }
    if let Some(v) = cli.tol_bound_slack {
        tol.bound_slack = v;
    }
    if let Some(v) = cli.tol_rank_tol {
        tol.rank_tol = v;
    }
    if let Some(v) = cli.tol_invert_floor {
        tol.invert_floor = v;
    }
    tol.validate()?;
    Ok(tol)
}

fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    let tol = tolerances(cli)?;
    if cli.csv && !matches!(cli.command, Command::Check { .. } | Command::Perturb { .. }) {
        return Err(CliError {
            message: "--csv only applies to check and perturb".into(),
            code: EXIT_USAGE,
        });
    }
    match &cli.command {
        Command::Classify { file } => commands::cmd_classify(file, &tol),
        Command::Multiplier { file, actions, vector } => {
            commands::cmd_multiplier(file, actions, vector.as_deref(), &tol)
        }
        Command::Check { suite, dims, counts, draws, seed, replay } => {
            let kind: SuiteKind = suite.parse().map_err(|e: String| CliError {
                message: e,
                code: EXIT_USAGE,
            })?;
            let parse_range = |text: &str, what: &str| -> Result<SizeRange, CliError> {
                text.parse().map_err(|e: String| CliError {
                    message: format!("bad {what} range: {e}"),
                    code: EXIT_USAGE,
                })
            };
            let cfg = SweepConfig {
                dims: parse_range(dims, "dimension")?,
                counts: parse_range(counts, "count")?,
                draws: *draws,
                seed: *seed,
            };
            commands::cmd_check(kind, &cfg, &tol, *replay, cli.csv)
        }
        Command::Perturb { file } => commands::cmd_perturb(file, &tol, cli.csv),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &output.body) {
                    eprintln!("gbmul: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            } else {
                print!("{}", output.body);
            }
            ExitCode::from(output.code as u8)
        }
        Err(err) => {
            eprintln!("gbmul: {}", err.message);
            ExitCode::from(err.code as u8)
        }
    }
}
