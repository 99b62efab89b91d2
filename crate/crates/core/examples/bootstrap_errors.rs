//! Sampling errors from a single run by resampling its threads, checked
//! against the spread of repeated runs.
//!
//! ```text
//! cargo run --release --example bootstrap_errors
//! ```

use dynamic_ns::analysis::{bootstrap_errors, estimate_many, BootstrapSettings, EstimatorId};
use dynamic_ns::dynamic::{dynamic_run_algorithm1, AlgorithmOneConfig, GoalConfig};
use dynamic_ns::model::ModelSpec;
use dynamic_ns::numerics::std_dev;
use dynamic_ns::sampler::stream_rng;

fn main() -> dynamic_ns::Result<()> {
    let model = ModelSpec::gaussian(3, 10.0)?;
    let goal = GoalConfig::new(1.0);
    let cfg = AlgorithmOneConfig::new(20, 1800);
    let ids = EstimatorId::TABLE;
    let settings = BootstrapSettings::default();

    let run = dynamic_run_algorithm1(&model, &goal, &cfg, &mut stream_rng(1, 0))?;
    let errs = bootstrap_errors(&run, &ids, &settings, &mut stream_rng(2, 0))?;

    let repeats: Vec<Vec<f64>> = (1..=100)
        .map(|i| estimate_many(&dynamic_run_algorithm1(&model, &goal, &cfg, &mut stream_rng(1, i))?, &ids))
        .collect::<dynamic_ns::Result<_>>()?;

    println!("{:<16}{:>12}{:>14}{:>16}", "estimator", "bootstrap", "100 repeats", "95% upper");
    for (k, id) in ids.iter().enumerate() {
        let col: Vec<f64> = repeats.iter().map(|r| r[k]).collect();
        println!("{:<16}{:>12.4}{:>14.4}{:>16.4}", id.name(), errs[k].std, std_dev(&col), errs[k].credible_upper);
    }
    Ok(())
}
