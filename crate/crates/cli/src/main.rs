use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lgatom_cli::config::load_config;
use lgatom_cli::scenario;
use lgatom_cli::CliResult;
use serde_json::json;

#[derive(Parser)]
#[command(name = "lgatom", version, about = "Trapped atom driven by a Laguerre-Gaussian beam")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the schedule; write trajectory CSV and analysis JSON.
    Simulate(Common),
    /// Run one scenario per `sweep.values` entry and write a manifest.
    Sweep(Common),
    /// Cross-check quadrature matrix elements against the ladder algebra.
    Oracle(Common),
    /// Dump mode and wavefunction grids, momentum densities and operators.
    Modes(Common),
    /// Validate the configuration only.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<serde_json::Value> {
    let (common, kind) = match &cli.command {
        Command::Validate { config } => {
            let loaded = load_config(config)?;
            return Ok(json!({
                "status": "valid",
                "warnings": loaded.warnings,
                "step_durations": scenario::step_durations(&loaded.config)?,
            }));
        }
        Command::Simulate(c) => (c, "simulate"),
        Command::Sweep(c) => (c, "sweep"),
        Command::Oracle(c) => (c, "oracle"),
        Command::Modes(c) => (c, "modes"),
    };
    let loaded = load_config(&common.config)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let cfg = loaded.config;
    let dir = common.out.clone().unwrap_or_else(|| cfg.outputs.dir.clone());
    let summary = match kind {
        "simulate" => {
            let report = scenario::simulate(&cfg, &loaded.warnings, &dir)?;
            json!({ "entropy_bits": report.final_state.entropy_bits, "steps": report.records.len() - 1 })
        }
        "sweep" => {
            let manifest = scenario::sweep(&cfg, &loaded.warnings, &dir)?;
            json!({ "points": manifest.points.len() })
        }
        "oracle" => {
            let report = scenario::oracle(&cfg, &dir)?;
            json!({ "rows": report.rows.len(), "max_difference": report.max_difference })
        }
        _ => {
            let report = scenario::modes(&cfg, &dir)?;
            json!({ "files": report.files.len() })
        }
    };
    Ok(json!({ "status": "ok", "command": kind, "out": dir, "summary": summary }))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = serde_json::to_string(&e.report()).unwrap_or_else(|_| e.to_string());
            eprintln!("{report}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
