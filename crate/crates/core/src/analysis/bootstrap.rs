//! Sampling-error estimates by resampling threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimators::{estimate_many, weighted_quantile, EstimatorId};
use crate::error::{Error, Result};
use crate::numerics::std_dev;
use crate::run::{NestedRun, Thread};
use crate::sampler::stream_rng;

/// Draw threads with replacement and rebuild a run with ids `0..k`.
///
/// With `separate_initial`, the threads of the initial exploratory run (ids
/// below the provenance `n_init`) and the remaining threads are resampled as
/// two classes, so every replication keeps the same number of threads that
/// start by sampling the whole prior.
pub fn bootstrap_resample<R: Rng + ?Sized>(run: &NestedRun, rng: &mut R, separate_initial: bool) -> Result<NestedRun> {
    let threads = run.split_into_threads();
    resample_threads(run, &threads, rng, separate_initial)
}

fn resample_threads<R: Rng + ?Sized>(run: &NestedRun, threads: &[Thread], rng: &mut R, separate_initial: bool) -> Result<NestedRun> {
    if threads.is_empty() {
        return Err(Error::EmptyRun);
    }
    let classes: Vec<Vec<&Thread>> = if separate_initial {
        let n_init = run
            .provenance()
            .n_init
            .ok_or_else(|| Error::InvalidRun("run provenance does not record its initial threads".into()))?;
        let (init, rest): (Vec<&Thread>, Vec<&Thread>) = threads.iter().partition(|t| (t.thread_id as usize) < n_init);
        vec![init, rest]
    } else {
        vec![threads.iter().collect()]
    };
    let mut out = Vec::with_capacity(threads.len());
    for class in classes.iter().filter(|c| !c.is_empty()) {
        for _ in 0..class.len() {
            let t = class[rng.random_range(0..class.len())];
            let id = out.len() as u32;
            out.push(Thread {
                thread_id: id,
                start_log_l: t.start_log_l,
                points: t.points.iter().map(|p| crate::run::SamplePoint { thread_id: id, ..*p }).collect(),
                open_end: t.open_end,
            });
        }
    }
    let mut provenance = run.provenance().clone();
    if separate_initial {
        // Initial-class threads were relabelled first.
        provenance.n_init = Some(classes[0].len());
    }
    NestedRun::from_threads(&out, run.model().clone(), provenance)
}

/// Spread of an estimator over bootstrap replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapError {
    pub std: f64,
    /// `q` quantile of the replication estimates.
    pub credible_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub n_reps: usize,
    #[serde(default = "default_true")]
    pub separate_initial: bool,
    /// Level of the one-tailed credible bound.
    #[serde(default = "default_level")]
    pub credible_level: f64,
}

fn default_true() -> bool {
    true
}

fn default_level() -> f64 {
    0.95
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            n_reps: 200,
            separate_initial: true,
            credible_level: 0.95,
        }
    }
}

/// Replication estimates, one row per replication in replication order.
/// Replications use independent streams derived from one draw of `rng`, so
/// the result does not depend on the thread pool.
pub fn bootstrap_replications<R: Rng + ?Sized>(
    run: &NestedRun,
    ids: &[EstimatorId],
    n_reps: usize,
    separate_initial: bool,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let seed: u64 = rng.random();
    let threads = run.split_into_threads();
    (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut r = stream_rng(seed, rep as u64);
            let resampled = resample_threads(run, &threads, &mut r, separate_initial)?;
            estimate_many(&resampled, ids)
        })
        .collect()
}

/// Bootstrap standard deviation and upper credible bound for each estimator.
pub fn bootstrap_errors<R: Rng + ?Sized>(
    run: &NestedRun,
    ids: &[EstimatorId],
    settings: &BootstrapSettings,
    rng: &mut R,
) -> Result<Vec<BootstrapError>> {
    if settings.n_reps < 2 {
        return Err(Error::Config("bootstrap needs at least 2 replications".into()));
    }
    let reps = bootstrap_replications(run, ids, settings.n_reps, settings.separate_initial, rng)?;
    let ones = vec![1.0; reps.len()];
    (0..ids.len())
        .map(|k| {
            let col: Vec<f64> = reps.iter().map(|r| r[k]).collect();
            Ok(BootstrapError {
                std: std_dev(&col),
                credible_upper: weighted_quantile(&col, &ones, settings.credible_level)?,
            })
        })
        .collect()
}

pub fn bootstrap_error<R: Rng + ?Sized>(
    run: &NestedRun,
    id: EstimatorId,
    settings: &BootstrapSettings,
    rng: &mut R,
) -> Result<BootstrapError> {
    Ok(bootstrap_errors(run, &[id], settings, rng)?[0])
}
