//! Tuning the parameter importance to one quantity. For a heavy-tailed
//! Cauchy likelihood the posterior mean of θ₁ depends on low-likelihood
//! tails, which the plain posterior-mass importance neglects.
//!
//! ```text
//! cargo run --release --example tuned_importance
//! ```

use dynamic_ns::analysis::EstimatorId;
use dynamic_ns::dynamic::{combined_importance, GoalConfig, ImportanceVariant};
use dynamic_ns::experiment::{ArmConfig, ExperimentConfig, Method};
use dynamic_ns::model::ModelSpec;
use dynamic_ns::sampler::{standard_run, stream_rng, SamplerConfig};

fn main() -> dynamic_ns::Result<()> {
    let model = ModelSpec::cauchy(10, 10.0)?;

    let run = standard_run(&model, &SamplerConfig::new(200), &mut stream_rng(1, 0))?;
    let plain = combined_importance(&run, &GoalConfig::new(1.0))?;
    let tuned = combined_importance(&run, &GoalConfig::tuned(1.0, EstimatorId::MeanTheta1))?;
    let spread = |v: &[f64]| {
        let k = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let lx = run.log_prior_volumes();
        let above: Vec<f64> = lx.iter().zip(v).filter(|(_, &i)| i > 0.1 * v[k]).map(|(x, _)| *x).collect();
        (lx[k], above.iter().cloned().fold(0.0, f64::min), above.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    };
    for (name, p) in [("posterior mass", &plain), ("tuned to mean θ1", &tuned)] {
        let (peak, lo, hi) = spread(&p.combined);
        println!("{name:>18}: peak at ln X {peak:.1}, above 10% of peak over [{lo:.1}, {hi:.1}]");
    }

    let mut t = ArmConfig::dynamic("g1_tuned", Method::Dyn1, GoalConfig::tuned(1.0, EstimatorId::MeanTheta1));
    let mut u = ArmConfig::dynamic("g1", Method::Dyn1, GoalConfig::new(1.0));
    t.n_batch = Some(5);
    u.n_batch = Some(5);
    assert_eq!(t.goal.unwrap().importance, ImportanceVariant::Tuned);
    let mut config = ExperimentConfig::new(model, vec![ArmConfig::standard("standard", 200), u, t], 60, 2);
    config.estimators = vec![EstimatorId::MeanTheta1, EstimatorId::SecondMomentTheta1];
    let report = config.report(&config.simulate()?)?;
    for arm in ["g1", "g1_tuned"] {
        let g = report.gain(arm, EstimatorId::MeanTheta1).unwrap();
        println!("{arm:>8}: mean θ1 gain {:.2} ± {:.2}", g.gain, g.sigma);
    }
    Ok(())
}
