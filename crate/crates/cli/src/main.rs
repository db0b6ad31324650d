//! `lrmech run <scenario> --out <dir>` and `lrmech verify <scenario>`.

mod error;
mod report;
mod scenario;
mod setup;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lrmech::integrators::{integrate, Method};

use crate::error::CliError;
use crate::setup::{Built, Overrides};

#[derive(Parser)]
#[command(name = "lrmech", version, about = "Simulate and verify rigid-body systems on SO(n) from scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write trajectory.csv, report.txt and report.json.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run the diagnostic checks that apply to the scenario's system.
    Verify {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
}

#[derive(Args)]
struct OverrideArgs {
    /// Step size, overriding `integrator.h`.
    #[arg(long)]
    h: Option<f64>,
    /// Number of steps, overriding `integrator.steps` and `integrator.t-end`.
    #[arg(long)]
    steps: Option<usize>,
    /// `rk4-projected` or `lie-rk4`.
    #[arg(long)]
    method: Option<Method>,
}

impl From<OverrideArgs> for Overrides {
    fn from(a: OverrideArgs) -> Self {
        Overrides { h: a.h, steps: a.steps, method: a.method }
    }
}

fn load(path: &Path, overrides: Overrides) -> Result<Built, CliError> {
    let source =
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let scenario = scenario::parse(&source).map_err(CliError::Parse)?;
    setup::build(scenario, overrides)
}

fn run(path: &Path, out: &Path, overrides: Overrides) -> Result<(), CliError> {
    let built = load(path, overrides)?;
    match integrate(built.system(), &built.x0, &built.cfg) {
        Ok(traj) => {
            let rep = report::build_report(&built, &traj)?;
            report::write_outputs(out, &report::trajectory_csv(&built, &traj), Some(&rep))?;
            print!("{}", report::report_text(&rep));
            Ok(())
        }
        Err(failure) => {
            // Keep the states reached so far for inspection.
            report::write_outputs(out, &report::trajectory_csv(&built, &failure.partial), None)?;
            Err(failure.into())
        }
    }
}

/// Returns whether every check passed.
fn verify(path: &Path, overrides: Overrides) -> Result<bool, CliError> {
    let built = load(path, overrides)?;
    let Some(results) = verify::verify(&built)? else {
        println!("no checks apply to this scenario");
        return Ok(true);
    };
    for r in &results {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
        for line in &r.table {
            println!("    {line}");
        }
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("{} checks, {failed} failed", results.len());
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, overrides } => run(&scenario, &out, overrides.into()).map(|_| true),
        Command::Verify { scenario, overrides } => verify(&scenario, overrides.into()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
