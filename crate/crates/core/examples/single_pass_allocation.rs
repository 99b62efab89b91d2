//! The single-pass variant: one exploratory run, a smoothed importance
//! profile, then one supplementary pass that follows the planned live-point
//! counts.
//!
//! ```text
//! cargo run --release --example single_pass_allocation
//! ```

use dynamic_ns::dynamic::algorithm2::plan;
use dynamic_ns::dynamic::{dynamic_run_algorithm2, AlgorithmTwoConfig, GoalConfig};
use dynamic_ns::model::ModelSpec;
use dynamic_ns::sampler::{standard_run, stream_rng, SamplerConfig};

fn main() -> dynamic_ns::Result<()> {
    let model = ModelSpec::gaussian(10, 10.0)?;
    let goal = GoalConfig::new(1.0);
    let cfg = AlgorithmTwoConfig::new(100, 15_000);

    // The planned allocation over an exploratory run.
    let init = standard_run(&model, &SamplerConfig::new(cfg.n_init), &mut stream_rng(3, 0))?;
    let a = plan(&init, &goal, &cfg)?;
    let busiest = a.extra.iter().enumerate().max_by_key(|e| e.1).map(|e| e.0).unwrap_or(0);
    println!(
        "initial run {} samples; scale K = {:.1}; expected total {:.0}; most extra live points ({}) at ln X ~ {:.1}",
        init.len(),
        a.scale,
        a.expected_samples,
        a.extra[busiest],
        -(busiest as f64) / cfg.n_init as f64
    );

    for seed in 0..5 {
        let run = dynamic_run_algorithm2(&model, &goal, &cfg, &mut stream_rng(4, seed))?;
        println!("run {seed}: {} samples (target {}), max live {}", run.len(), cfg.total_budget, run.live_point_counts().iter().max().unwrap());
    }
    Ok(())
}
