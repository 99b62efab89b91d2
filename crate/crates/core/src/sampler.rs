//! Perfect nested sampling: exact draws from the prior inside any likelihood
//! contour of a spherically symmetric model.
//!
//! A draw inside a contour of prior volume `X` lands at volume `X u` with
//! `u ~ U(0, 1)`, which is inverted to a radius through the model. Threads
//! are sequences of such shrinkages for one live point; a standard run is
//! `n` threads advanced in likelihood order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::numerics::{log_add_exp, log_sub_exp};
use crate::run::{NestedRun, OpenLivePoint, Provenance, SamplePoint, Thread};
use crate::specialfn::SphereCoordinate;

pub const DEFAULT_TERMINATION_FRACTION: f64 = 1e-3;

/// Deterministic RNG for one unit of work, derived from a base seed and a
/// stream index. Streams are independent ChaCha sequences, so results do not
/// depend on which worker runs which stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_live: usize,
    #[serde(default = "default_termination")]
    pub termination_fraction: f64,
    #[serde(default = "default_true")]
    pub keep_final_live: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_termination() -> f64 {
    DEFAULT_TERMINATION_FRACTION
}

fn default_true() -> bool {
    true
}

impl SamplerConfig {
    pub fn new(n_live: usize) -> Self {
        Self {
            n_live,
            termination_fraction: DEFAULT_TERMINATION_FRACTION,
            keep_final_live: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_live < 1 {
            return Err(Error::Config("n_live must be >= 1".into()));
        }
        if !(self.termination_fraction > 0.0 && self.termination_fraction < 1.0) {
            return Err(Error::Config("termination_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// A likelihood contour together with its exact prior volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub log_l: f64,
    pub log_x: f64,
}

impl Contour {
    /// The whole prior.
    pub const PRIOR: Contour = Contour {
        log_l: f64::NEG_INFINITY,
        log_x: 0.0,
    };

    /// The contour through an existing sample.
    pub fn at(point: &SamplePoint) -> Self {
        Self {
            log_l: point.log_l,
            log_x: point.true_log_x,
        }
    }

    /// Contour at a given log-likelihood, with its volume from the model.
    pub fn from_log_l(model: &ModelSpec, log_l: f64) -> Result<Self> {
        if log_l == f64::NEG_INFINITY {
            return Ok(Self::PRIOR);
        }
        let r = model.radius_from_log_likelihood(log_l)?;
        Ok(Self {
            log_l,
            log_x: model.log_x_from_radius(r)?,
        })
    }
}

/// Coordinates of one exact draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub log_l: f64,
    pub theta1: f64,
    pub radius: f64,
    pub true_log_x: f64,
}

impl Draw {
    pub fn into_point(self, birth_log_l: f64, thread_id: u32) -> SamplePoint {
        SamplePoint {
            log_l: self.log_l,
            birth_log_l,
            theta1: self.theta1,
            radius: self.radius,
            true_log_x: self.true_log_x,
            thread_id,
        }
    }
}

/// Exact sampler for one model.
#[derive(Debug, Clone)]
pub struct PerfectSampler {
    model: ModelSpec,
    direction: SphereCoordinate,
}

impl PerfectSampler {
    pub fn new(model: &ModelSpec) -> Self {
        Self {
            model: model.clone(),
            direction: SphereCoordinate::new(model.dim()).expect("model dimension validated at construction"),
        }
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// Uniform prior draw inside the contour of volume `exp(log_x_upper)`.
    pub fn draw_point_above<R: Rng + ?Sized>(&self, log_x_upper: f64, rng: &mut R) -> Draw {
        let u: f64 = rng.sample(Open01);
        let true_log_x = log_x_upper + u.ln();
        let radius = self.model.radius_unchecked(true_log_x);
        Draw {
            log_l: self.model.log_l_unchecked(radius),
            theta1: radius * self.direction.sample(rng),
            radius,
            true_log_x,
        }
    }

    /// One live point shrinking from `start` until the first point with
    /// likelihood above `end_log_l`, which is kept. With `end_log_l = +inf`
    /// the thread holds a single point.
    pub fn sample_thread<R: Rng + ?Sized>(&self, start: Contour, end_log_l: f64, thread_id: u32, rng: &mut R) -> Result<Thread> {
        if !(start.log_l < end_log_l) {
            return Err(Error::domain(format!("thread start {} must lie below its end {}", start.log_l, end_log_l)));
        }
        if end_log_l.is_finite() && end_log_l >= self.model.log_peak() {
            return Err(Error::domain("thread end lies above the likelihood peak"));
        }
        let mut points = Vec::new();
        let mut contour = start;
        loop {
            let p = self.draw_point_above(contour.log_x, rng).into_point(contour.log_l, thread_id);
            contour = Contour::at(&p);
            points.push(p);
            if end_log_l == f64::INFINITY || p.log_l > end_log_l {
                break;
            }
        }
        Ok(Thread {
            thread_id,
            start_log_l: start.log_l,
            points,
            open_end: false,
        })
    }
}

/// Heap entry ordered so that `BinaryHeap` pops the lowest likelihood first.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Live(pub(crate) SamplePoint);

impl PartialEq for Live {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Live {}

impl PartialOrd for Live {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Live {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .log_l
            .total_cmp(&self.0.log_l)
            .then(other.0.thread_id.cmp(&self.0.thread_id))
    }
}

/// Running `Σ exp(l)` over the live set, rescaled as the maximum rises.
struct LiveSum {
    reference: f64,
    scaled: f64,
}

impl LiveSum {
    fn from_heap(heap: &BinaryHeap<Live>) -> Self {
        let reference = heap.iter().map(|l| l.0.log_l).fold(f64::NEG_INFINITY, f64::max);
        let scaled = heap.iter().map(|l| (l.0.log_l - reference).exp()).sum();
        Self { reference, scaled }
    }

    fn add(&mut self, log_l: f64) {
        if log_l > self.reference {
            self.scaled = self.scaled * (self.reference - log_l).exp() + 1.0;
            self.reference = log_l;
        } else {
            self.scaled += (log_l - self.reference).exp();
        }
    }

    fn remove(&mut self, log_l: f64) {
        self.scaled = (self.scaled - (log_l - self.reference).exp()).max(0.0);
    }

    fn ln_sum(&self) -> f64 {
        self.reference + self.scaled.ln()
    }
}

/// Standard nested sampling with a constant number of live points.
///
/// Terminates once the live-point evidence estimate, mean live likelihood
/// times the current expected volume, falls below `termination_fraction`
/// times the evidence already in dead points. Final live points are appended
/// as a decreasing-count tail when `keep_final_live` is set, and otherwise
/// kept only as open live points so counts stay at `n_live`.
pub fn standard_run<R: Rng + ?Sized>(model: &ModelSpec, cfg: &SamplerConfig, rng: &mut R) -> Result<NestedRun> {
    cfg.validate()?;
    let sampler = PerfectSampler::new(model);
    let n = cfg.n_live;
    let nf = n as f64;
    let mut heap: BinaryHeap<Live> = (0..n)
        .map(|t| Live(sampler.draw_point_above(0.0, rng).into_point(f64::NEG_INFINITY, t as u32)))
        .collect();
    let mut live_sum = LiveSum::from_heap(&heap);
    let log_frac = cfg.termination_fraction.ln();
    let half = 0.5f64.ln();

    let mut dead: Vec<SamplePoint> = Vec::new();
    let mut log_z_dead = f64::NEG_INFINITY;
    loop {
        let Live(point) = heap.pop().expect("live set never empties before termination");
        live_sum.remove(point.log_l);
        let i = dead.len() as f64 + 1.0;
        let log_w = half + log_sub_exp(-(i - 1.0) / nf, -(i + 1.0) / nf);
        log_z_dead = log_add_exp(log_z_dead, point.log_l + log_w);
        dead.push(point);

        let next = sampler
            .draw_point_above(point.true_log_x, rng)
            .into_point(point.log_l, point.thread_id);
        heap.push(Live(next));
        live_sum.add(next.log_l);
        if dead.len() % n == 0 {
            live_sum = LiveSum::from_heap(&heap);
        }

        let log_z_live = live_sum.ln_sum() - nf.ln() - i / nf;
        if log_z_live < log_frac + log_z_dead {
            break;
        }
    }

    let mut open_live = Vec::new();
    if cfg.keep_final_live {
        while let Some(Live(p)) = heap.pop() {
            dead.push(p);
        }
    } else {
        open_live.extend(heap.into_iter().map(|Live(p)| OpenLivePoint {
            thread_id: p.thread_id,
            birth_log_l: p.birth_log_l,
        }));
        open_live.sort_by_key(|o| o.thread_id);
    }
    let mut provenance = Provenance::new(cfg.seed, "standard");
    provenance.n_init = Some(n);
    Ok(NestedRun::from_sorted_unchecked(dead, model.clone(), provenance, open_live))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{mean, variance};

    #[test]
    fn shrinkage_from_prior_has_unit_mean() {
        let m = ModelSpec::gaussian(3, 10.0).unwrap();
        let s = PerfectSampler::new(&m);
        let mut rng = stream_rng(1, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| s.draw_point_above(0.0, &mut rng).true_log_x).collect();
        assert!((mean(&xs) + 1.0).abs() < 0.01);
    }

    #[test]
    fn draws_land_inside_contour() {
        let m = ModelSpec::gaussian(10, 10.0).unwrap();
        let s = PerfectSampler::new(&m);
        let mut rng = stream_rng(2, 0);
        for &upper in &[-0.1, -5.0, -30.0, -60.0] {
            let l_contour = m.log_likelihood_from_log_x(upper).unwrap();
            for _ in 0..1000 {
                let d = s.draw_point_above(upper, &mut rng);
                assert!(d.log_l > l_contour);
                assert!(d.theta1.abs() <= d.radius);
            }
        }
    }

    #[test]
    fn theta1_moments_at_fixed_contour() {
        let m = ModelSpec::gaussian(10, 10.0).unwrap();
        let s = PerfectSampler::new(&m);
        let mut rng = stream_rng(3, 0);
        let n = 1_000_000;
        let mut t = Vec::with_capacity(n);
        let mut ratio = Vec::with_capacity(n);
        for _ in 0..n {
            let d = s.draw_point_above(-20.0, &mut rng);
            t.push(d.theta1);
            ratio.push((d.theta1 / d.radius).powi(2));
        }
        let se = (variance(&t) / n as f64).sqrt();
        assert!(mean(&t).abs() < 5.0 * se);
        // theta1^2 / r^2 has mean 1/d independent of the radius.
        let se2 = (variance(&ratio) / n as f64).sqrt();
        assert!((mean(&ratio) - 0.1).abs() < 5.0 * se2);
    }

    #[test]
    fn thread_lengths_follow_unit_shrinkage() {
        let m = ModelSpec::gaussian(3, 10.0).unwrap();
        let s = PerfectSampler::new(&m);
        let mut rng = stream_rng(4, 0);
        let end = Contour::from_log_l(&m, m.log_likelihood_from_log_x(-5.0).unwrap()).unwrap();
        let lens: Vec<f64> = (0..10_000)
            .map(|i| {
                let t = s.sample_thread(Contour::PRIOR, end.log_l, i, &mut rng).unwrap();
                t.validate().unwrap();
                assert!(t.points.last().unwrap().log_l > end.log_l);
                assert!(t.points[..t.points.len() - 1].iter().all(|p| p.log_l <= end.log_l));
                t.points.len() as f64
            })
            .collect();
        // Points up to volume e^-5 form a unit-rate Poisson process in -ln X,
        // plus the one point past the end contour.
        let se = (5.0f64 / 10_000.0).sqrt();
        assert!((mean(&lens) - 6.0).abs() < 5.0 * se, "mean={}", mean(&lens));
    }

    #[test]
    fn thread_with_tiny_range_has_one_point() {
        let m = ModelSpec::gaussian(3, 10.0).unwrap();
        let s = PerfectSampler::new(&m);
        let mut rng = stream_rng(5, 0);
        let start = Contour::from_log_l(&m, m.log_likelihood_from_log_x(-2.0).unwrap()).unwrap();
        let t = s.sample_thread(start, start.log_l + 1e-12, 0, &mut rng).unwrap();
        assert_eq!(t.points.len(), 1);
        let t = s.sample_thread(start, f64::INFINITY, 0, &mut rng).unwrap();
        assert_eq!(t.points.len(), 1);
        assert!(s.sample_thread(start, start.log_l, 0, &mut rng).is_err());
    }

    #[test]
    fn n1_run_has_unit_counts_before_tail() {
        let m = ModelSpec::gaussian(2, 10.0).unwrap();
        let run = standard_run(&m, &SamplerConfig::new(1), &mut stream_rng(6, 0)).unwrap();
        run.validate().unwrap();
        assert!(run.live_point_counts().iter().all(|&n| n == 1));
    }

    #[test]
    fn final_live_tail_counts_down() {
        let m = ModelSpec::gaussian(3, 10.0).unwrap();
        let run = standard_run(&m, &SamplerConfig::new(50), &mut stream_rng(7, 0)).unwrap();
        run.validate().unwrap();
        let counts = run.live_point_counts();
        let k = counts.len();
        assert!(counts[..k - 50].iter().all(|&n| n == 50));
        let tail: Vec<u32> = (1..=50).rev().collect();
        assert_eq!(&counts[k - 50..], &tail[..]);
        assert_eq!(run.thread_count(), 50);
    }

    #[test]
    fn discarded_live_points_keep_counts_constant() {
        let m = ModelSpec::gaussian(3, 10.0).unwrap();
        let mut cfg = SamplerConfig::new(20);
        cfg.keep_final_live = false;
        let run = standard_run(&m, &cfg, &mut stream_rng(8, 0)).unwrap();
        run.validate().unwrap();
        assert!(run.live_point_counts().iter().all(|&n| n == 20));
        assert_eq!(run.open_live().len(), 20);
    }

    #[test]
    fn runs_are_reproducible() {
        let m = ModelSpec::exp_power(4, 2.0, 10.0).unwrap();
        let cfg = SamplerConfig::new(30);
        let a = standard_run(&m, &cfg, &mut stream_rng(9, 3)).unwrap();
        let b = standard_run(&m, &cfg, &mut stream_rng(9, 3)).unwrap();
        assert_eq!(a, b);
        let c = standard_run(&m, &cfg, &mut stream_rng(9, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SamplerConfig::new(0);
        assert!(cfg.validate().is_err());
        cfg.n_live = 5;
        cfg.termination_fraction = 1.0;
        assert!(cfg.validate().is_err());
    }
}
