//! Iterative dynamic nested sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::importance::combined_from_weights;
use super::GoalConfig;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::run::{counts_from_sorted_births, order_key, NestedRun, Provenance, RunWeights, SamplePoint};
use crate::sampler::{standard_run, Contour, PerfectSampler, SamplerConfig};

pub const DEFAULT_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmOneConfig {
    pub n_init: usize,
    /// Threads cover the points whose importance exceeds this fraction of
    /// the maximum.
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    /// Threads added per importance update.
    #[serde(default = "one")]
    pub n_batch: usize,
    /// Stop once the run holds at least this many samples.
    pub sample_budget: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_fraction() -> f64 {
    DEFAULT_FRACTION
}

fn one() -> usize {
    1
}

impl AlgorithmOneConfig {
    pub fn new(n_init: usize, sample_budget: usize) -> Self {
        Self {
            n_init,
            fraction: DEFAULT_FRACTION,
            n_batch: 1,
            sample_budget,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init < 1 || self.n_batch < 1 {
            return Err(Error::Config("n_init and n_batch must be >= 1".into()));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::Config(format!("fraction must lie in (0, 1], got {}", self.fraction)));
        }
        Ok(())
    }
}

/// Start from a standard run with `n_init` live points, then repeatedly add
/// `n_batch` threads spanning the region where the importance exceeds
/// `fraction` of its maximum, until the sample budget is reached.
///
/// Each added thread starts at the contour of the point just before that
/// region (or samples the whole prior if the region begins at the first
/// point) and ends with its first point above the contour just after it. A
/// region reaching the last point ends one point past it.
pub fn dynamic_run_algorithm1<R: Rng + ?Sized>(model: &ModelSpec, goal: &GoalConfig, cfg: &AlgorithmOneConfig, rng: &mut R) -> Result<NestedRun> {
    cfg.validate()?;
    goal.validate()?;
    let mut init_cfg = SamplerConfig::new(cfg.n_init);
    init_cfg.seed = cfg.seed;
    let init = standard_run(model, &init_cfg, rng)?;
    let sampler = PerfectSampler::new(model);

    let mut points: Vec<SamplePoint> = init.points().to_vec();
    let mut births: Vec<f64> = points.iter().map(|p| p.birth_log_l).collect();
    births.sort_by(f64::total_cmp);
    let mut next_id = cfg.n_init as u32;
    let mut new_points: Vec<SamplePoint> = Vec::new();
    let mut new_births: Vec<f64> = Vec::new();

    while points.len() < cfg.sample_budget {
        let w = RunWeights::from_counts(&points, counts_from_sorted_births(&points, &births));
        let imp = combined_from_weights(&points, &w, goal)?;
        let max = imp.iter().cloned().fold(0.0, f64::max);
        let threshold = cfg.fraction * max;
        let j = imp.iter().position(|&v| v >= threshold).expect("maximum exists");
        let k = imp.iter().rposition(|&v| v >= threshold).expect("maximum exists");
        let start = if j == 0 { Contour::PRIOR } else { Contour::at(&points[j - 1]) };
        let end = if k + 1 == points.len() { points[k].log_l } else { points[k + 1].log_l };

        new_points.clear();
        for _ in 0..cfg.n_batch {
            let t = sampler.sample_thread(start, end, next_id, rng)?;
            next_id += 1;
            new_points.extend_from_slice(&t.points);
        }
        new_points.sort_by(order_key);
        new_births.clear();
        new_births.extend(new_points.iter().map(|p| p.birth_log_l));
        new_births.sort_by(f64::total_cmp);
        points = merge_sorted(&points, &new_points, order_key);
        births = merge_sorted(&births, &new_births, f64::total_cmp);
    }

    let mut provenance = Provenance::new(cfg.seed, "dyn1");
    provenance.n_init = Some(cfg.n_init);
    provenance.goal = Some(goal.g);
    provenance.sample_budget = Some(cfg.sample_budget);
    Ok(NestedRun::from_sorted_unchecked(points, model.clone(), provenance, Vec::new()))
}

/// Stable merge of two sorted slices; ties keep `a` first.
pub(crate) fn merge_sorted<T: Copy>(a: &[T], b: &[T], cmp: impl Fn(&T, &T) -> std::cmp::Ordering) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if cmp(&b[j], &a[i]) == std::cmp::Ordering::Less {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::stream_rng;

    #[test]
    fn budget_at_initial_size_returns_initial_run() {
        let m = ModelSpec::gaussian(3, 10.0).unwrap();
        let init = standard_run(&m, &SamplerConfig::new(10), &mut stream_rng(1, 0)).unwrap();
        let cfg = AlgorithmOneConfig::new(10, init.len());
        let run = dynamic_run_algorithm1(&m, &GoalConfig::new(1.0), &cfg, &mut stream_rng(1, 0)).unwrap();
        assert_eq!(run.points(), init.points());
        assert_eq!(run.provenance().n_init, Some(10));
    }

    #[test]
    fn output_is_valid_and_meets_budget() {
        let m = ModelSpec::gaussian(5, 10.0).unwrap();
        for (i, g) in [0.0, 0.25, 1.0].into_iter().enumerate() {
            let mut cfg = AlgorithmOneConfig::new(10, 3000);
            cfg.n_batch = 3;
            let run = dynamic_run_algorithm1(&m, &GoalConfig::new(g), &cfg, &mut stream_rng(2, i as u64)).unwrap();
            run.validate().unwrap();
            assert!(run.len() >= 3000);
            assert!(run.thread_count() > 10);
        }
    }

    #[test]
    fn g1_adds_live_points_in_the_bulk() {
        let m = ModelSpec::gaussian(10, 10.0).unwrap();
        let cfg = AlgorithmOneConfig { n_batch: 5, ..AlgorithmOneConfig::new(20, 6000) };
        let run = dynamic_run_algorithm1(&m, &GoalConfig::new(1.0), &cfg, &mut stream_rng(3, 0)).unwrap();
        let counts = run.live_point_counts();
        let peak = run.log_prior_volumes()[counts.iter().enumerate().max_by_key(|(_, &n)| n).unwrap().0];
        assert!((peak - m.log_x_of_peak_posterior_mass()).abs() < 3.0, "peak={peak}");
        assert!(*counts.first().unwrap() == 20);
    }

    #[test]
    fn merge_is_stable() {
        let a = [(1, 'a'), (3, 'a')];
        let b = [(1, 'b'), (2, 'b')];
        let m = merge_sorted(&a, &b, |x, y| x.0.cmp(&y.0));
        assert_eq!(m, vec![(1, 'a'), (1, 'b'), (2, 'b'), (3, 'a')]);
    }
}
