//! `flattenings`: identity checks, covariance scans, moment and oracle runs,
//! freeness reports and spectrum experiments over random tensor flattenings.
//!
//! Exit status: 0 pass, 1 tolerance failure, 2 usage or guard error.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Shared;
use crate::report::{CliError, Report};

#[derive(Parser, Debug)]
#[command(name = "flattenings", version, about = "Flattenings of random tensors: checks, oracle and spectra")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact finite-N identities of flattenings and permutation operators.
    Check(commands::CheckArgs),
    /// E_N(M_s^e U_eta M_s'^e') by Monte Carlo, by the exact oracle, and in the limit.
    Covariance(commands::CovarianceArgs),
    /// Limit value of a word against exact oracle values over several N.
    Moments(commands::MomentsArgs),
    /// Exact expected trace of a word by summing over vertex partitions.
    Oracle(commands::OracleArgs),
    /// Moment (and optional histogram) experiment for S1, S2 or S3.
    Spectrum(commands::SpectrumArgs),
    /// Freeness conditions for character-weighted flattening sums.
    Freeness(commands::FreenessArgs),
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let s = &cli.shared;
    match &cli.command {
        Command::Check(a) => commands::check(s, a),
        Command::Covariance(a) => commands::covariance_cmd(s, a),
        Command::Moments(a) => commands::moments(s, a),
        Command::Oracle(a) => commands::oracle(s, a),
        Command::Spectrum(a) => commands::spectrum(s, a),
        Command::Freeness(a) => commands::freeness(s, a),
    }
}

fn emit(report: &Report) -> Result<(), CliError> {
    let text = report.render();
    match &report.config.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|r| emit(&r).map(|_| r.passed));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
