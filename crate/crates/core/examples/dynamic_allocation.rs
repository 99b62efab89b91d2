//! Dynamic nested sampling with the iterative algorithm: how the goal `G`
//! moves live points between the evidence and the posterior bulk.
//!
//! ```text
//! cargo run --release --example dynamic_allocation
//! ```

use dynamic_ns::dynamic::{dynamic_run_algorithm1, AlgorithmOneConfig, GoalConfig};
use dynamic_ns::model::ModelSpec;
use dynamic_ns::sampler::stream_rng;

fn main() -> dynamic_ns::Result<()> {
    let model = ModelSpec::gaussian(10, 10.0)?;
    let peak = model.log_x_of_peak_posterior_mass();
    println!("posterior mass L(X)X peaks at ln X = {peak:.2}");

    for g in [0.0, 0.25, 1.0] {
        let cfg = AlgorithmOneConfig {
            n_batch: 10,
            ..AlgorithmOneConfig::new(50, 15_000)
        };
        let run = dynamic_run_algorithm1(&model, &GoalConfig::new(g), &cfg, &mut stream_rng(7, 0))?;
        let n = run.live_point_counts();
        let log_x = run.log_prior_volumes();

        // Live points averaged over unit bins of ln X.
        let mut bins = vec![(0.0, 0usize); 32];
        for (x, c) in log_x.iter().zip(&n) {
            let b = (-x) as usize;
            if b < bins.len() {
                bins[b].0 += *c as f64;
                bins[b].1 += 1;
            }
        }
        let profile: Vec<String> = bins
            .iter()
            .step_by(2)
            .map(|(s, k)| if *k == 0 { "-".into() } else { format!("{:.0}", s / *k as f64) })
            .collect();
        println!("G={g:<4} samples={} threads={} n(ln X=0,-2,..): {}", run.len(), run.thread_count(), profile.join(" "));
    }
    Ok(())
}
