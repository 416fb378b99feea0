//! Front end for `hypflow`: configuration, experiment dispatch, CSV/SVG
//! artifacts and the verify suite.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, ValueEnum};

use crate::config::ConfigError;
use crate::verify::VerificationFailed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Quermassintegrals, deficit, h-convexity margin and inradius of a shape.
    Quermass,
    /// Run the flow and write its trace.
    Flow,
    /// Stability sweep over a perturbation family.
    Sweep,
    /// Full property suite; nonzero exit on any failure.
    Verify,
    /// Conformal ball image residuals.
    Conformal,
}

#[derive(Debug, Parser)]
#[command(name = "hypflow", version, about = "Curvature flow and stability experiments in hyperbolic space")]
pub struct Cli {
    pub command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const VERIFICATION: i32 = 4;
    pub const IO: i32 = 5;
}

/// Exit status for an error, from the first recognized cause in its chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return exit::CONFIG;
        }
        if cause.is::<VerificationFailed>() {
            return exit::VERIFICATION;
        }
        if cause.is::<hypflow_core::Error>() {
            return exit::NUMERICAL;
        }
        if cause.is::<std::io::Error>() {
            return exit::IO;
        }
    }
    exit::NUMERICAL
}

/// Runs one command; the returned text is the human-readable summary.
pub fn dispatch(command: Command, config: &Path, out: &Path, plot: bool) -> anyhow::Result<String> {
    let cfg = config::parse_config(config)?;
    if command != Command::Quermass {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    }
    match command {
        Command::Quermass => commands::quermass(&cfg),
        Command::Flow => commands::flow(&cfg, out, plot),
        Command::Sweep => commands::sweep(&cfg, out, plot),
        Command::Conformal => commands::conformal(&cfg, out),
        Command::Verify => {
            let report = verify::run_suite(&cfg);
            let text = report.to_string();
            output::write_text(&out.join(&cfg.outputs.verify), &text)?;
            print!("{text}");
            if report.passed() {
                Ok(String::new())
            } else {
                let failed = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                Err(VerificationFailed { failed }.into())
            }
        }
    }
}
