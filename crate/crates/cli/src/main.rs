//! `entroshift`: front tracking, shift construction, and entropy
//! certificates for scalar conservation laws, driven by JSON scenarios.

mod commands;
mod report;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::scenario::ScenarioError;

#[derive(Parser)]
#[command(name = "entroshift", version, about = "Entropy-shift certificates for scalar conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario, build the comparison function, and check every
    /// certificate; exits 0 only when all pass.
    Run {
        /// Scenario description (JSON, schema 1)
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory for result.json and CSV exports
        #[arg(long, default_value = "entroshift-out")]
        out: PathBuf,
        /// Override the scenario's entropy budget
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Sample the structural lemmas (sign law, velocity bound, shock
    /// riding, midlocus, comparability, mollified shifts) at random states.
    CheckLemmas {
        /// Optional scenario supplying the model; defaults to Burgers
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Random draws per lemma
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// RNG seed; fixed seed gives identical reports
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the layered comparison function and write psi.json.
    BuildPsi {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "entroshift-out")]
        out: PathBuf,
        /// Override the scenario's entropy budget
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Check the one-sided Lipschitz (Oleinik) bound on psi directly.
    VerifyConditionE {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's entropy budget
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Evolve a scenario and export the front skeleton as CSV.
    ExportFronts {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "entroshift-out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, eps } => commands::cmd_run(&scenario, &out, eps),
        Command::CheckLemmas { scenario, samples, seed } => {
            commands::cmd_check_lemmas(scenario.as_deref(), samples, seed)
        }
        Command::BuildPsi { scenario, out, eps } => commands::cmd_build_psi(&scenario, &out, eps),
        Command::VerifyConditionE { scenario, eps } => {
            commands::cmd_verify_condition_e(&scenario, eps)
        }
        Command::ExportFronts { scenario, out } => commands::cmd_export_fronts(&scenario, &out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<ScenarioError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
