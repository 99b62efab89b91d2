//! Efficiency gain of dynamic over standard nested sampling: the variance
//! ratio of repeated results, corrected for the samples each method used.
//!
//! ```text
//! cargo run --release --example efficiency_gain
//! ```

use dynamic_ns::dynamic::GoalConfig;
use dynamic_ns::experiment::{ArmConfig, ExperimentConfig, Method};
use dynamic_ns::model::ModelSpec;

fn main() -> dynamic_ns::Result<()> {
    let model = ModelSpec::gaussian(5, 10.0)?;
    let mut g0 = ArmConfig::dynamic("g0", Method::Dyn1, GoalConfig::new(0.0));
    let mut g1 = ArmConfig::dynamic("g1", Method::Dyn1, GoalConfig::new(1.0));
    g0.n_batch = Some(4);
    g1.n_batch = Some(4);
    let config = ExperimentConfig::new(model, vec![ArmConfig::standard("standard", 200), g0, g1], 100, 5);

    let arms = config.simulate()?;
    let report = config.report(&arms)?;
    for row in &report.gains {
        let cells: Vec<String> = report
            .estimators
            .iter()
            .zip(&row.gains)
            .map(|(e, g)| g.map_or(format!("{}=-", e.name()), |g| format!("{}={:.2}±{:.2}", e.name(), g.gain, g.sigma)))
            .collect();
        println!("{} vs {}: {}", row.arm, row.baseline, cells.join("  "));
    }
    println!();
    print!("{}", report.to_csv());
    Ok(())
}
