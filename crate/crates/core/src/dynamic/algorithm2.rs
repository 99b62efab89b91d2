//! Single-pass dynamic nested sampling from one smoothed allocation.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;

use super::importance::profile_from_weights;
use super::savgol::savitzky_golay_smooth;
use super::GoalConfig;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::run::{NestedRun, Provenance, SamplePoint};
use crate::sampler::{standard_run, Contour, Live, PerfectSampler, SamplerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmTwoConfig {
    pub n_init: usize,
    /// Target total number of samples, initial run included.
    pub total_budget: usize,
    /// Smoothing window; defaults to `2 n_init + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth_window: Option<usize>,
    #[serde(default = "three")]
    pub smooth_order: usize,
    #[serde(default)]
    pub seed: u64,
}

fn three() -> usize {
    3
}

impl AlgorithmTwoConfig {
    pub fn new(n_init: usize, total_budget: usize) -> Self {
        Self {
            n_init,
            total_budget,
            smooth_window: None,
            smooth_order: 3,
            seed: 0,
        }
    }

    pub fn window(&self) -> usize {
        self.smooth_window.unwrap_or(2 * self.n_init + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init < 1 {
            return Err(Error::Config("n_init must be >= 1".into()));
        }
        if self.total_budget < 1 {
            return Err(Error::Config("total_budget must be >= 1".into()));
        }
        let w = self.window();
        if w % 2 == 0 || w <= self.smooth_order {
            return Err(Error::Config(format!("smoothing window {w} must be odd and exceed the order {}", self.smooth_order)));
        }
        Ok(())
    }
}

/// Extra live points wanted at each contour of the exploratory run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Scale `K` applied to the smoothed importance.
    pub scale: f64,
    /// `round(K I_i - n_init)` where positive, else 0.
    pub extra: Vec<usize>,
    /// Expected number of supplementary samples, `Σ extra_i / n_i`.
    pub expected_samples: f64,
}

fn extra_at(scale: f64, imp: f64, n_init: f64) -> usize {
    let v = scale * imp;
    if v > n_init {
        (v - n_init).round() as usize
    } else {
        0
    }
}

fn expected_samples(scale: f64, imp: &[f64], n_live: &[u32], n_init: f64) -> f64 {
    imp.iter()
        .zip(n_live)
        .map(|(&i, &n)| extra_at(scale, i, n_init) as f64 / n as f64)
        .sum()
}

/// Find `K` so that the supplement is expected to add `target` samples, each
/// exploratory step spanning `1/n_i` in `ln X`.
pub fn allocate(imp: &[f64], n_live: &[u32], n_init: usize, target: f64) -> Result<Allocation> {
    let nf = n_init as f64;
    let max = imp.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::Degenerate("smoothed importance is nowhere positive".into()));
    }
    let f = |k: f64| expected_samples(k, imp, n_live, nf);
    if target <= 0.0 {
        return Ok(Allocation {
            scale: 0.0,
            extra: vec![0; imp.len()],
            expected_samples: 0.0,
        });
    }
    let mut lo = nf / max;
    let mut hi = 2.0 * lo;
    let mut guard = 0;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Config("sample budget is unreachable".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    let scale = if (f(lo) - target).abs() < (f(hi) - target).abs() { lo } else { hi };
    Ok(Allocation {
        scale,
        extra: imp.iter().map(|&i| extra_at(scale, i, nf)).collect(),
        expected_samples: f(scale),
    })
}

/// Exploratory run with `n_init` live points, one smoothed importance
/// profile, then a supplementary run whose live-point count follows the
/// allocation: new threads start at an exploratory contour when the target
/// count rises there, and dead points are only replaced while the count is
/// below target. The supplement is merged with the exploratory run.
pub fn dynamic_run_algorithm2<R: Rng + ?Sized>(model: &ModelSpec, goal: &GoalConfig, cfg: &AlgorithmTwoConfig, rng: &mut R) -> Result<NestedRun> {
    cfg.validate()?;
    goal.validate()?;
    let mut init_cfg = SamplerConfig::new(cfg.n_init);
    init_cfg.seed = cfg.seed;
    let init = standard_run(model, &init_cfg, rng)?;
    let mut provenance = Provenance::new(cfg.seed, "dyn2");
    provenance.n_init = Some(cfg.n_init);
    provenance.goal = Some(goal.g);
    provenance.sample_budget = Some(cfg.total_budget);
    if cfg.total_budget <= init.len() {
        return Ok(NestedRun::from_sorted_unchecked(init.points().to_vec(), model.clone(), provenance, Vec::new()));
    }
    let alloc = plan(&init, goal, cfg)?;
    let supplement = realise(model, init.points(), &alloc.extra, cfg.n_init as u32, rng);
    let mut points = init.points().to_vec();
    points.extend(supplement);
    NestedRun::from_points(points, model.clone(), provenance)
}

/// Smoothed importance and allocation for an exploratory run.
pub fn plan(init: &NestedRun, goal: &GoalConfig, cfg: &AlgorithmTwoConfig) -> Result<Allocation> {
    let w = init.weights()?;
    let imp = profile_from_weights(init.points(), &w, goal)?.combined;
    let smooth: Vec<f64> = savitzky_golay_smooth(&imp, cfg.window(), cfg.smooth_order)?
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    let target = cfg.total_budget as f64 - init.len() as f64;
    allocate(&smooth, &w.n_live, cfg.n_init, target)
}

/// Variable-live-point run following `extra[i]` live points between
/// contours `i - 1` and `i` of `init`. Returns its points, unsorted.
pub(crate) fn realise<R: Rng + ?Sized>(model: &ModelSpec, init: &[SamplePoint], extra: &[usize], first_id: u32, rng: &mut R) -> Vec<SamplePoint> {
    let sampler = PerfectSampler::new(model);
    let mut heap: BinaryHeap<Live> = BinaryHeap::new();
    let mut out = Vec::new();
    let mut next_id = first_id;
    for (i, p) in init.iter().enumerate() {
        let target = extra[i];
        let contour = if i == 0 { Contour::PRIOR } else { Contour::at(&init[i - 1]) };
        while heap.len() < target {
            let q = sampler.draw_point_above(contour.log_x, rng).into_point(contour.log_l, next_id);
            next_id += 1;
            heap.push(Live(q));
        }
        while heap.peek().is_some_and(|l| l.0.log_l < p.log_l) {
            let Live(dead) = heap.pop().unwrap();
            out.push(dead);
            if heap.len() < target {
                let q = sampler
                    .draw_point_above(dead.true_log_x, rng)
                    .into_point(dead.log_l, dead.thread_id);
                heap.push(Live(q));
            }
        }
    }
    while let Some(Live(p)) = heap.pop() {
        out.push(p);
    }
    out
}
