//! Command-line front end for batch experiments.
//!
//! ```text
//! dynns generate        --config exp.json --out results/
//! dynns compare         --config exp.json --out results/
//! dynns alloc-profile   --config exp.json --out results/
//! dynns bootstrap-table --config exp.json --out results/
//! ```
//!
//! Every command reads run files from and writes tables to `--out`. Failures
//! print a JSON error record on stderr and exit with status 1.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use dynamic_ns::experiment::{cmd_alloc_profile, cmd_bootstrap_table, cmd_compare, cmd_generate, with_workers, ExperimentConfig};
use dynamic_ns::Error;

#[derive(Parser)]
#[command(name = "dynns", version, about = "Standard and dynamic nested sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; also where run files are read from.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all cores). Overrides the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Base seed. Overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate run files and a manifest.
    Generate(Common),
    /// Compare arms: estimator spread and efficiency gains.
    Compare(Common),
    /// Live points against log X with analytic reference curves.
    AllocProfile(Common),
    /// Bootstrap error estimates against repeated-run spread.
    BootstrapTable(Common),
}

fn run(cli: Cli) -> Result<String, Error> {
    let (common, cmd) = match &cli.command {
        Command::Generate(c) => (c, "generate"),
        Command::Compare(c) => (c, "compare"),
        Command::AllocProfile(c) => (c, "alloc-profile"),
        Command::BootstrapTable(c) => (c, "bootstrap-table"),
    };
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(w) = common.workers {
        config.workers = w;
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    let out = &common.out;
    with_workers(config.workers, || -> Result<String, Error> {
        Ok(match cmd {
            "generate" => {
                let m = cmd_generate(&config, out)?;
                serde_json::json!({ "command": cmd, "runs": m.runs.len(), "arms": m.arms }).to_string()
            }
            "compare" => {
                cmd_compare(&config, out, out)?;
                serde_json::json!({ "command": cmd, "report": out.join("report.csv") }).to_string()
            }
            "alloc-profile" => {
                let p = cmd_alloc_profile(&config, out, out)?;
                serde_json::json!({ "command": cmd, "arms": p.iter().map(|p| &p.arm).collect::<Vec<_>>() }).to_string()
            }
            _ => {
                cmd_bootstrap_table(&config, out, out)?;
                serde_json::json!({ "command": cmd, "table": out.join("bootstrap_table.csv") }).to_string()
            }
        })
    })?
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut record = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            if let Error::MissingRuns(m) = &e {
                record["missing"] = serde_json::json!(m);
            }
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
