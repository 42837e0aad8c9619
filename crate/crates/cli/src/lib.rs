//! Scenario runner: reads a JSON config, constructs the packet, propagates it
//! and writes CSV diagnostics plus a JSON report.

pub mod config;
pub mod construct;
pub mod error;
pub mod output;
pub mod scenario;
pub mod selfcheck;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::ScenarioConfig;
pub use construct::{run_construct, ConstructOutcome};
pub use error::{exit, CliError};
pub use verify::{run_verify, RunReport, VerifyOutcome};

#[derive(Debug, Parser)]
#[command(name = "nonspread", version, about = "Construct and verify nonspreading wave packets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build shape, phase and consistency tables.
    Construct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Construct, propagate and score the packet.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in property suite.
    Selfcheck {
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FaultArg {
    Stencil,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Construct { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let o = run_construct(&cfg, &out)?;
            for p in &o.construction.consistency.offending_powers {
                eprintln!("inconsistent: coefficient of q^{p} varies in time");
            }
            println!("wrote {} to {}", o.files.join(", "), out.display());
            Ok(o.exit_code)
        }
        Command::Verify { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let o = run_verify(&cfg, &out)?;
            let v = o.report.verdicts;
            println!(
                "consistency={} nonspreading={} flux_ok={} phase_ok={} energy_ok={}",
                v.consistency, v.nonspreading, v.flux_ok, v.phase_ok, v.energy_ok
            );
            println!("wrote {} files to {}", o.report.files.len(), out.display());
            Ok(o.exit_code())
        }
        Command::Selfcheck { inject_fault } => {
            let fault = match inject_fault {
                Some(FaultArg::Stencil) => selfcheck::Fault::Stencil,
                None => selfcheck::Fault::None,
            };
            let checks = selfcheck::run_checks(fault);
            print!("{}", selfcheck::render(&checks));
            Ok(if checks.iter().all(selfcheck::Check::passed) { exit::OK } else { exit::SELFCHECK })
        }
    }
}
