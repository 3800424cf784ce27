use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use teledense_cli::commands::{self, Outcome, RunConfig};
use teledense_cli::error::{CliError, CliResult};
use teledense_cli::report::Format;
use teledense::Tolerances;

/// Numerical toolkit for teleportation protocols and their dense-coding
/// duals: identity checks, threshold sweeps, protocol synthesis, bilinear
/// see-saws, and dense-coding reports.
#[derive(Parser)]
#[command(name = "teledense", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for the portable RNG (ChaCha8); recorded in every report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report encoding.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Tolerance overrides as key=value (keys: herm, trace, cptp, povm,
    /// psd, schmidt, eig, margin). May be repeated.
    #[arg(long = "tol")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the fidelity-discrimination identity on random protocols.
    VerifyLemma1 {
        /// Number of random protocols.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Largest dimension sampled for each subsystem.
        #[arg(long = "max-dim", default_value_t = 3)]
        max_dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the two-qutrit exchange-symmetric family through the fixed
    /// 3 -> 2 channel and synthesize protocols where it violates the
    /// reduction criterion.
    WernerSweep {
        #[arg(long = "lambda-min", default_value_t = -1.0, allow_hyphen_values = true)]
        lambda_min: f64,
        #[arg(long = "lambda-max", default_value_t = 1.0, allow_hyphen_values = true)]
        lambda_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Build a protocol beating the classical fidelity from a state file.
    Synthesize {
        /// Resource state (JSON state file).
        #[arg(long)]
        state: PathBuf,
        /// Optional processing channel (JSON Kraus file); searched for when
        /// omitted.
        #[arg(long)]
        channel: Option<PathBuf>,
        /// Dimension of the teleported system.
        #[arg(long = "dim-c")]
        dim_c: usize,
        /// Search restarts when no channel is given.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Where to write the synthesized protocol.
        #[arg(long = "protocol-out", default_value = "synthesized-protocol.json")]
        protocol_out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Lower-bound both bilinear programs on a state file.
    Seesaw {
        #[arg(long)]
        state: PathBuf,
        #[arg(long = "dim-c")]
        dim_c: usize,
        /// Message count for the fidelity program.
        #[arg(long)]
        messages: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long = "max-iter", default_value_t = 60)]
        max_iter: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Dense-coding audit of a protocol file.
    DenseReport {
        #[arg(long)]
        protocol: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::VerifyLemma1 { common, .. } => common,
            Command::WernerSweep { common, .. } => common,
            Command::Synthesize { common, .. } => common,
            Command::Seesaw { common, .. } => common,
            Command::DenseReport { common, .. } => common,
        }
    }
}

fn parse_tolerances(pairs: &[String]) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--tol expects key=value, got `{pair}`")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("--tol {key}: `{value}` is not a number")))?;
        tol.set(key, value)
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(tol)
}

fn run(cli: Cli, command_line: String) -> CliResult<Outcome> {
    let common = cli.command.common();
    let cfg = RunConfig {
        seed: common.seed,
        tolerances: parse_tolerances(&common.tol)?,
        command_line,
    };
    match &cli.command {
        Command::VerifyLemma1 { count, max_dim, .. } => {
            commands::cmd_verify_lemma1(*count, *max_dim, &cfg)
        }
        Command::WernerSweep {
            lambda_min,
            lambda_max,
            step,
            ..
        } => commands::cmd_werner_sweep(*lambda_min, *lambda_max, *step, &cfg),
        Command::Synthesize {
            state,
            channel,
            dim_c,
            restarts,
            protocol_out,
            ..
        } => commands::cmd_synthesize(
            state,
            channel.as_deref(),
            *dim_c,
            *restarts,
            protocol_out,
            &cfg,
        ),
        Command::Seesaw {
            state,
            dim_c,
            messages,
            restarts,
            max_iter,
            ..
        } => commands::cmd_seesaw(state, *dim_c, *messages, *restarts, *max_iter, &cfg),
        Command::DenseReport { protocol, .. } => commands::cmd_dense_report(protocol, &cfg),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let command_line = args.join(" ");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    let out = cli.command.common().out.clone();
    let format = cli.command.common().format;
    match run(cli, command_line) {
        Ok(Outcome { report, failure }) => {
            let rendered = report.render(format);
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, rendered) {
                    eprintln!("io error: {e}");
                    return ExitCode::from(3);
                }
            } else {
                print!("{rendered}");
            }
            match failure {
                Some(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
