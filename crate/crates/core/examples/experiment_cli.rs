//! The batch workflow behind the `dynns` binary, driven from code: generate
//! run files, compare arms, and emit allocation and bootstrap tables.
//!
//! ```text
//! cargo run --release --example experiment_cli -- /tmp/dynns-demo
//! ```
//!
//! The same steps from the command line, given the printed config:
//!
//! ```text
//! dynns generate        --config exp.json --out results/
//! dynns compare         --config exp.json --out results/
//! dynns alloc-profile   --config exp.json --out results/
//! dynns bootstrap-table --config exp.json --out results/
//! ```

use std::path::PathBuf;

use dynamic_ns::analysis::{BootstrapSettings, EstimatorId};
use dynamic_ns::dynamic::GoalConfig;
use dynamic_ns::experiment::{cmd_alloc_profile, cmd_bootstrap_table, cmd_compare, cmd_generate, ArmConfig, ExperimentConfig, Method};
use dynamic_ns::model::ModelSpec;

fn main() -> dynamic_ns::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("dynns-demo"), PathBuf::from);
    let mut config = ExperimentConfig::new(
        ModelSpec::gaussian(3, 10.0)?,
        vec![
            ArmConfig::standard("standard", 100),
            ArmConfig::dynamic("g1", Method::Dyn1, GoalConfig::new(1.0)),
            ArmConfig::dynamic("g1_single_pass", Method::Dyn2, GoalConfig::new(1.0)),
        ],
        20,
        2024,
    );
    config.bootstrap = BootstrapSettings { n_reps: 50, ..Default::default() };
    println!("{}", serde_json::to_string_pretty(&config)?);

    let manifest = cmd_generate(&config, &out)?;
    for a in &manifest.arms {
        println!("{}: {} runs, mean {:.0} samples", a.arm, a.n_runs, a.mean_samples);
    }
    let report = cmd_compare(&config, &out, &out)?;
    for arm in ["g1", "g1_single_pass"] {
        let g = report.gain(arm, EstimatorId::MeanTheta1).unwrap();
        println!("{arm}: mean θ1 gain {:.2} ± {:.2}", g.gain, g.sigma);
    }
    for p in cmd_alloc_profile(&config, &out, &out)? {
        println!("{}: live points peak at ln X {:.2}", p.arm, p.peak_log_x());
    }
    let table = cmd_bootstrap_table(&config, &out, &out)?;
    println!("bootstrap/repeats ratio: {:?}", table.row("bootstrap_ratio").unwrap());
    println!("outputs in {}", out.display());
    Ok(())
}
