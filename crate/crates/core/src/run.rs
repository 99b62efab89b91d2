//! Nested sampling run data model.
//!
//! A run is a likelihood-ordered list of dead points. Live-point counts are
//! never stored: each point records the contour it was born inside, and the
//! number of live points across shrinkage `i` is recovered as
//! `n_i = #{j : birth_j < L_i <= L_j}`. With likelihood ties, as in
//! bootstrap replicas that repeat a thread, each thread is instead counted as
//! live over its span in the sorted order. This makes combining runs a plain
//! merge and decomposing them into single-live-point threads a group-by.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::numerics::{log_sub_exp, normalize_log_weights};

/// One dead point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub log_l: f64,
    /// Log-likelihood of the contour the point was drawn inside; -inf for
    /// draws from the whole prior.
    pub birth_log_l: f64,
    /// First parameter component.
    pub theta1: f64,
    /// `|θ|`.
    pub radius: f64,
    /// The generator's actual log prior volume. Diagnostic only; never read
    /// by an estimator.
    pub true_log_x: f64,
    pub thread_id: u32,
}

/// How a run was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub algorithm: String,
    /// Live points of the initial exploratory run (threads `0..n_init` are
    /// its threads) for dynamic runs; `n` for standard runs.
    pub n_init: Option<usize>,
    pub goal: Option<f64>,
    pub sample_budget: Option<usize>,
}

impl Provenance {
    pub fn new(seed: u64, algorithm: impl Into<String>) -> Self {
        Self {
            seed,
            algorithm: algorithm.into(),
            n_init: None,
            goal: None,
            sample_budget: None,
        }
    }
}

/// A live point present at the end of a run but not recorded as a sample.
///
/// Only produced by standard runs that discard their final live points; it
/// keeps the derived live-point count at its true value over the last
/// recorded points of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenLivePoint {
    pub thread_id: u32,
    pub birth_log_l: f64,
}

/// A single-live-point sub-run.
#[derive(Debug, Clone, PartialEq)]
pub struct Thread {
    pub thread_id: u32,
    pub start_log_l: f64,
    pub points: Vec<SamplePoint>,
    /// Whether the thread's final live point was left unrecorded.
    pub open_end: bool,
}

impl Thread {
    /// Check that the points form one live point's chain from `start_log_l`.
    pub fn validate(&self) -> Result<()> {
        let mut contour = self.start_log_l;
        for p in &self.points {
            if p.thread_id != self.thread_id {
                return Err(Error::InvalidRun(format!("thread {} holds a point of thread {}", self.thread_id, p.thread_id)));
            }
            if p.birth_log_l != contour || !(p.log_l > contour) {
                return Err(Error::InvalidRun(format!("thread {} is not a contiguous chain", self.thread_id)));
            }
            contour = p.log_l;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedRun {
    points: Vec<SamplePoint>,
    model: ModelSpec,
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    open_live: Vec<OpenLivePoint>,
}

/// Per-point quantities derived from the live-point counts.
#[derive(Debug, Clone, Default)]
pub struct RunWeights {
    pub n_live: Vec<u32>,
    /// `E[ln X_i]`.
    pub log_x: Vec<f64>,
    /// Trapezium weights `ln w_i`.
    pub log_w: Vec<f64>,
    /// `ln(L_i w_i)`.
    pub log_lw: Vec<f64>,
}

pub(crate) fn order_key(a: &SamplePoint, b: &SamplePoint) -> std::cmp::Ordering {
    a.log_l
        .total_cmp(&b.log_l)
        .then(a.thread_id.cmp(&b.thread_id))
}

impl NestedRun {
    /// Build a run from points in any order. Points are stably sorted by
    /// `(log_l, thread_id)` so ties keep their insertion order, then the run
    /// is validated.
    pub fn from_points(mut points: Vec<SamplePoint>, model: ModelSpec, provenance: Provenance) -> Result<Self> {
        points.sort_by(order_key);
        let run = Self {
            points,
            model,
            provenance,
            open_live: Vec::new(),
        };
        run.validate()?;
        Ok(run)
    }

    pub fn empty(model: ModelSpec, provenance: Provenance) -> Self {
        Self {
            points: Vec::new(),
            model,
            provenance,
            open_live: Vec::new(),
        }
    }

    /// Trusted constructor for generators that already emit sorted, valid
    /// point lists.
    pub(crate) fn from_sorted_unchecked(
        points: Vec<SamplePoint>,
        model: ModelSpec,
        provenance: Provenance,
        open_live: Vec<OpenLivePoint>,
    ) -> Self {
        debug_assert!(points.windows(2).all(|w| order_key(&w[0], &w[1]).is_le()));
        Self {
            points,
            model,
            provenance,
            open_live,
        }
    }

    pub fn with_open_live(mut self, open_live: Vec<OpenLivePoint>) -> Result<Self> {
        self.open_live = open_live;
        self.validate()?;
        Ok(self)
    }

    pub fn points(&self) -> &[SamplePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn provenance_mut(&mut self) -> &mut Provenance {
        &mut self.provenance
    }

    pub fn open_live(&self) -> &[OpenLivePoint] {
        &self.open_live
    }

    pub fn log_likelihoods(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.log_l).collect()
    }

    /// Check ordering, per-point and per-thread invariants and that every
    /// point has at least one live point.
    pub fn validate(&self) -> Result<()> {
        if !self.points.windows(2).all(|w| order_key(&w[0], &w[1]).is_le()) {
            return Err(Error::InvalidRun("points are not sorted by likelihood".into()));
        }
        let mut last: HashMap<u32, f64> = HashMap::new();
        for p in &self.points {
            if !(p.log_l > p.birth_log_l) {
                return Err(Error::InvalidRun(format!("point with log_l {} not above its birth contour {}", p.log_l, p.birth_log_l)));
            }
            if !(p.radius >= 0.0) || p.theta1.abs() > p.radius * (1.0 + 1e-12) {
                return Err(Error::InvalidRun("parameter summaries out of range".into()));
            }
            if let Some(prev) = last.get(&p.thread_id) {
                if p.birth_log_l != *prev {
                    return Err(Error::InvalidRun(format!("thread {} is not a contiguous chain", p.thread_id)));
                }
            }
            last.insert(p.thread_id, p.log_l);
        }
        for o in &self.open_live {
            if let Some(prev) = last.get(&o.thread_id) {
                if o.birth_log_l != *prev {
                    return Err(Error::InvalidRun(format!("open live point of thread {} detached from its chain", o.thread_id)));
                }
            }
        }
        if self.live_point_counts().iter().any(|&n| n == 0) {
            return Err(Error::InvalidRun("a point has no live points".into()));
        }
        Ok(())
    }

    /// Number of threads live at each position of the sorted order. A thread
    /// is live from just after its previous point, or from the first point
    /// above its start contour, through its own last point; an open live
    /// point keeps it live to the end. Without ties this is
    /// `n_i = #{j : birth_j < L_i <= L_j}`; tied points die one at a time.
    pub fn live_point_counts(&self) -> Vec<u32> {
        let n = self.points.len();
        let mut diff = vec![0i64; n + 1];
        let mut last: HashMap<u32, usize> = HashMap::new();
        let start = |last: &HashMap<u32, usize>, id: u32, birth: f64| match last.get(&id) {
            Some(&k) if self.points[k].log_l == birth => k + 1,
            _ => self.points.partition_point(|p| p.log_l <= birth),
        };
        for (i, p) in self.points.iter().enumerate() {
            diff[start(&last, p.thread_id, p.birth_log_l)] += 1;
            diff[i + 1] -= 1;
            last.insert(p.thread_id, i);
        }
        for o in &self.open_live {
            diff[start(&last, o.thread_id, o.birth_log_l)] += 1;
        }
        let mut acc = 0i64;
        diff[..n]
            .iter()
            .map(|d| {
                acc += d;
                acc.max(0) as u32
            })
            .collect()
    }

    /// `E[ln X_i] = -Σ_{k<=i} 1/n_k`.
    pub fn log_prior_volumes(&self) -> Vec<f64> {
        log_volumes(&self.live_point_counts())
    }

    /// Trapezium-rule `ln w_i` with `X_0 = 1` and `X_{N+1} = 0`.
    pub fn point_log_weights(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(Error::EmptyRun);
        }
        Ok(trapezium_log_weights(&self.log_prior_volumes()))
    }

    /// Counts, volumes and weights in one pass.
    pub fn weights(&self) -> Result<RunWeights> {
        if self.is_empty() {
            return Err(Error::EmptyRun);
        }
        let n_live = self.live_point_counts();
        Ok(RunWeights::from_counts(&self.points, n_live))
    }

    /// Normalised posterior weights `p_i ∝ L_i w_i`.
    pub fn posterior_weights(&self) -> Result<Vec<f64>> {
        let w = self.weights()?;
        normalize_log_weights(&w.log_lw).ok_or_else(|| Error::Degenerate("all posterior weights are zero".into()))
    }

    /// Thread decomposition, ordered by thread id.
    pub fn split_into_threads(&self) -> Vec<Thread> {
        let mut by_id: HashMap<u32, Thread> = HashMap::new();
        for p in &self.points {
            by_id
                .entry(p.thread_id)
                .or_insert_with(|| Thread {
                    thread_id: p.thread_id,
                    start_log_l: p.birth_log_l,
                    points: Vec::new(),
                    open_end: false,
                })
                .points
                .push(*p);
        }
        for o in &self.open_live {
            by_id
                .entry(o.thread_id)
                .or_insert_with(|| Thread {
                    thread_id: o.thread_id,
                    start_log_l: o.birth_log_l,
                    points: Vec::new(),
                    open_end: false,
                })
                .open_end = true;
        }
        let mut threads: Vec<Thread> = by_id.into_values().collect();
        threads.sort_by_key(|t| t.thread_id);
        threads
    }

    /// Reassemble a run from threads; thread ids are kept as given.
    pub fn from_threads(threads: &[Thread], model: ModelSpec, provenance: Provenance) -> Result<Self> {
        let mut points = Vec::with_capacity(threads.iter().map(|t| t.points.len()).sum());
        let mut open_live = Vec::new();
        for t in threads {
            points.extend_from_slice(&t.points);
            if t.open_end {
                open_live.push(OpenLivePoint {
                    thread_id: t.thread_id,
                    birth_log_l: t.points.last().map_or(t.start_log_l, |p| p.log_l),
                });
            }
        }
        points.sort_by(order_key);
        let run = Self {
            points,
            model,
            provenance,
            open_live,
        };
        run.validate()?;
        Ok(run)
    }

    /// Number of distinct threads, including threads holding only an open
    /// live point.
    pub fn thread_count(&self) -> usize {
        let mut ids: Vec<u32> = self.points.iter().map(|p| p.thread_id).collect();
        ids.extend(self.open_live.iter().map(|o| o.thread_id));
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Merge runs on a shared model. Thread ids of later runs are shifted past
/// those of earlier ones so the inputs' threads stay distinct.
pub fn combine_runs(runs: &[NestedRun]) -> Result<NestedRun> {
    let first = runs.first().ok_or_else(|| Error::InvalidRun("nothing to combine".into()))?;
    if runs.iter().any(|r| r.model != first.model) {
        return Err(Error::ModelMismatch);
    }
    let mut points = Vec::with_capacity(runs.iter().map(NestedRun::len).sum());
    let mut open_live = Vec::new();
    let mut offset: u32 = 0;
    for run in runs {
        let max_id = run
            .points
            .iter()
            .map(|p| p.thread_id)
            .chain(run.open_live.iter().map(|o| o.thread_id))
            .max();
        points.extend(run.points.iter().map(|p| SamplePoint {
            thread_id: p.thread_id + offset,
            ..*p
        }));
        open_live.extend(run.open_live.iter().map(|o| OpenLivePoint {
            thread_id: o.thread_id + offset,
            ..*o
        }));
        if let Some(m) = max_id {
            offset += m + 1;
        }
    }
    points.sort_by(order_key);
    let mut provenance = first.provenance.clone();
    if runs.len() > 1 {
        provenance.algorithm = "combined".into();
    }
    Ok(NestedRun {
        points,
        model: first.model.clone(),
        provenance,
        open_live,
    })
}

/// Live counts for points sorted by likelihood given every birth contour in
/// ascending order, for runs without likelihood ties.
pub(crate) fn counts_from_sorted_births(points: &[SamplePoint], sorted_births: &[f64]) -> Vec<u32> {
    let mut out = Vec::with_capacity(points.len());
    let mut b = 0usize;
    for (i, p) in points.iter().enumerate() {
        while b < sorted_births.len() && sorted_births[b] < p.log_l {
            b += 1;
        }
        // births below L_i minus the deaths ordered before i
        out.push(b.saturating_sub(i) as u32);
    }
    out
}

pub(crate) fn log_volumes(n_live: &[u32]) -> Vec<f64> {
    let mut acc = 0.0;
    n_live
        .iter()
        .map(|&n| {
            acc -= 1.0 / n as f64;
            acc
        })
        .collect()
}

pub(crate) fn trapezium_log_weights(log_x: &[f64]) -> Vec<f64> {
    let half = 0.5f64.ln();
    let n = log_x.len();
    (0..n)
        .map(|i| {
            let prev = if i == 0 { 0.0 } else { log_x[i - 1] };
            let next = if i + 1 == n { f64::NEG_INFINITY } else { log_x[i + 1] };
            half + log_sub_exp(prev, next)
        })
        .collect()
}

impl RunWeights {
    pub(crate) fn from_counts(points: &[SamplePoint], n_live: Vec<u32>) -> Self {
        let log_x = log_volumes(&n_live);
        let log_w = trapezium_log_weights(&log_x);
        let log_lw = points.iter().zip(&log_w).map(|(p, w)| p.log_l + w).collect();
        Self {
            n_live,
            log_x,
            log_w,
            log_lw,
        }
    }
}
