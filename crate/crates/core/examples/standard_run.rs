//! A standard nested sampling run on a 10-d Gaussian with a Gaussian prior,
//! compared with the analytic answers.
//!
//! ```text
//! cargo run --release --example standard_run
//! ```

use dynamic_ns::analysis::{analytic_value, estimate_many, information_content, EstimatorId};
use dynamic_ns::model::ModelSpec;
use dynamic_ns::sampler::{standard_run, stream_rng, SamplerConfig};

fn main() -> dynamic_ns::Result<()> {
    let model = ModelSpec::gaussian(10, 10.0)?;
    let mut rng = stream_rng(42, 0);
    let run = standard_run(&model, &SamplerConfig::new(500), &mut rng)?;

    println!("samples: {}", run.len());
    println!("effective samples: {:.0}", information_content(&run)?);

    let ids = EstimatorId::ALL;
    let est = estimate_many(&run, &ids)?;
    println!("{:<22}{:>12}{:>12}", "estimator", "run", "analytic");
    for (id, v) in ids.iter().zip(est) {
        let truth = analytic_value(&model, *id).map_or("-".into(), |t| format!("{t:.4}"));
        println!("{:<22}{v:>12.4}{truth:>12}", id.name());
    }

    // The final live points are recorded as a tail whose count falls to 1.
    let counts = run.live_point_counts();
    println!("first counts {:?} ... last counts {:?}", &counts[..3], &counts[counts.len() - 3..]);
    Ok(())
}
