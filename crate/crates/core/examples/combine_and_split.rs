//! Runs decompose into single-live-point threads, and threads from any
//! runs combine into one valid run whose live-point counts add up.
//!
//! ```text
//! cargo run --release --example combine_and_split
//! ```

use dynamic_ns::analysis::log_evidence_estimate;
use dynamic_ns::model::ModelSpec;
use dynamic_ns::run::combine_runs;
use dynamic_ns::sampler::{standard_run, stream_rng, SamplerConfig};
use dynamic_ns::NestedRun;

fn main() -> dynamic_ns::Result<()> {
    let model = ModelSpec::gaussian(4, 10.0)?;
    let runs: Vec<NestedRun> = (0..4)
        .map(|i| standard_run(&model, &SamplerConfig::new(25), &mut stream_rng(9, i)))
        .collect::<dynamic_ns::Result<_>>()?;
    for r in &runs {
        println!("run: {} samples, {} threads, ln Z = {:.3}", r.len(), r.thread_count(), log_evidence_estimate(r)?);
    }

    let all = combine_runs(&runs)?;
    all.validate()?;
    println!("combined: {} samples, {} threads, ln Z = {:.3} (analytic {:.3})", all.len(), all.thread_count(), log_evidence_estimate(&all)?, model.analytic_log_evidence());
    let n = all.live_point_counts();
    println!("live points at the start {}, at the middle {}", n[0], n[n.len() / 2]);

    let threads = all.split_into_threads();
    let back = NestedRun::from_threads(&threads, all.model().clone(), all.provenance().clone())?;
    println!("{} threads reassemble to the same run: {}", threads.len(), back == all);
    Ok(())
}
