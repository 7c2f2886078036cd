//! `ushaptic`: run scenarios, dump field maps and phase solutions, and run
//! the acceptance suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

use commands::CliError;

#[derive(Parser)]
#[command(name = "ushaptic", version, about = "Ultrasound-driven tilting-disk haptics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(short = 'o', long = "output-dir", env = "USHAPTIC_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,

    /// Scenario override `section.key=value`; repeatable, applied in order.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Reserved. The simulation is deterministic and ignores it.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Suppress the report on standard output.
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario; writes the trace, summary and profile.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write |p| and phase over the scenario's `[field_map]` slice.
    FieldMap {
        scenario: PathBuf,
        /// Focus point `x,y,z` in m (default: `field_map.focus_m`).
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        focus: Option<[f64; 3]>,
        #[command(flatten)]
        common: Common,
    },
    /// Write the per-element focusing phases as `index,phase_rad`.
    Phases {
        scenario: PathBuf,
        /// Focus point `x,y,z` in m (default: `field_map.focus_m`).
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        focus: Option<[f64; 3]>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance suite and report pass/fail counts.
    Validate {
        /// Run only these criteria (1-10); repeatable.
        #[arg(long = "only", value_name = "ID")]
        only: Vec<u8>,
        /// Suppress per-criterion lines.
        #[arg(short, long)]
        quiet: bool,
    },
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got `{s}`"));
    }
    let mut p = [0.0; 3];
    for (dst, src) in p.iter_mut().zip(&parts) {
        *dst = src.parse().map_err(|e| format!("`{src}`: {e}"))?;
    }
    Ok(p)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, common } => commands::run(&scenario, &common),
        Command::FieldMap { scenario, focus, common } => commands::field_map(&scenario, focus, &common),
        Command::Phases { scenario, focus, common } => commands::phases(&scenario, focus, &common),
        Command::Validate { only, quiet } => commands::validate(&only, quiet),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
