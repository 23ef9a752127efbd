//! `supersingular`: batch front end for the finite-radius computations.
//!
//! Exit codes: 0 when every claim is verified, 1 when a claim fails or a
//! computation aborts, 2 on a configuration error.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use supersingular::invariants::InvariantError;
use supersingular::quotient::QuotientError;
use supersingular::weights::WeightError;

use commands::Outcome;
use config::{ConfigError, Flags, RunConfig};

#[derive(Parser)]
#[command(name = "supersingular", version, about = "Exact computations in compact inductions for GL2 over p-adic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the I(1)-invariants of ind σ/(T) through a radius.
    Invariants(Flags),
    /// List the labelled weight set of the seed weight.
    WeightSet(Flags),
    /// Execute the staged quotient construction.
    Quotient(Flags),
    /// Run verification suites and report pass/fail.
    Verify(Flags),
}

/// Library precondition failures are configuration errors, not failed claims.
fn is_precondition(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<ConfigError>()
            || matches!(cause.downcast_ref::<InvariantError>(), Some(InvariantError::Precondition(_)))
            || matches!(cause.downcast_ref::<QuotientError>(), Some(QuotientError::Precondition(_)))
            || matches!(
                cause.downcast_ref::<WeightError>(),
                Some(WeightError::DigitOutOfRange { .. } | WeightError::WrongLength { .. } | WeightError::UnsupportedRegime { .. })
            )
    })
}

fn emit(cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.body).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout().write_all(outcome.body.as_bytes()).context("writing standard output"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (flags, run): (&Flags, fn(&RunConfig) -> Result<Outcome>) = match &cli.command {
        Command::Invariants(fl) => (fl, commands::invariants),
        Command::WeightSet(fl) => (fl, commands::weight_set_cmd),
        Command::Quotient(fl) => (fl, commands::quotient),
        Command::Verify(fl) => (fl, commands::verify),
    };
    let cfg = match RunConfig::resolve(flags) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("config error: {err:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            if let Err(err) = emit(&cfg, &outcome) {
                eprintln!("error: {err:#}");
                return ExitCode::from(1);
            }
            if outcome.verified {
                ExitCode::SUCCESS
            } else {
                eprintln!("claim failed; see the report");
                ExitCode::from(1)
            }
        }
        Err(err) if is_precondition(&err) => {
            eprintln!("config error: {err:#}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
