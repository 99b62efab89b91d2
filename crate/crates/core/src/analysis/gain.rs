//! Efficiency gains and ensemble summaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::estimators::{analytic_value, EstimatorId};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::numerics::{mean, variance};

pub const GAIN_BOOTSTRAP_REPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gain {
    pub gain: f64,
    /// Bootstrap standard deviation of the gain.
    pub sigma: f64,
}

/// `(Var_std / Var_dyn) (N̄_std / N̄_dyn)`: how many times fewer samples the
/// dynamic method needs for the same variance.
pub fn efficiency_gain(std_results: &[f64], dyn_results: &[f64], mean_samples_std: f64, mean_samples_dyn: f64) -> Result<Gain> {
    efficiency_gain_with(std_results, dyn_results, mean_samples_std, mean_samples_dyn, GAIN_BOOTSTRAP_REPS, 0)
}

/// [`efficiency_gain`] with an explicit bootstrap size and seed for `sigma`.
pub fn efficiency_gain_with(
    std_results: &[f64],
    dyn_results: &[f64],
    mean_samples_std: f64,
    mean_samples_dyn: f64,
    n_boot: usize,
    seed: u64,
) -> Result<Gain> {
    if std_results.len() < 2 || dyn_results.len() < 2 {
        return Err(Error::domain("each arm needs at least 2 results"));
    }
    if !(mean_samples_std > 0.0 && mean_samples_dyn > 0.0) {
        return Err(Error::domain("mean sample counts must be positive"));
    }
    let v_dyn = variance(dyn_results);
    if !(v_dyn > 0.0) {
        return Err(Error::Degenerate("dynamic results have zero variance".into()));
    }
    let ratio = mean_samples_std / mean_samples_dyn;
    let gain = variance(std_results) / v_dyn * ratio;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf_s = vec![0.0; std_results.len()];
    let mut buf_d = vec![0.0; dyn_results.len()];
    let mut gains = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        for b in buf_s.iter_mut() {
            *b = std_results[rng.random_range(0..std_results.len())];
        }
        for b in buf_d.iter_mut() {
            *b = dyn_results[rng.random_range(0..dyn_results.len())];
        }
        let vd = variance(&buf_d);
        if vd > 0.0 {
            gains.push(variance(&buf_s) / vd * ratio);
        }
    }
    let sigma = if gains.len() >= 2 { variance(&gains).sqrt() } else { 0.0 };
    Ok(Gain { gain, sigma })
}

/// Jackknife standard error of the sample standard deviation.
pub fn std_dev_uncertainty(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 3 {
        return 0.0;
    }
    let nf = n as f64;
    let s1: f64 = values.iter().sum();
    let s2: f64 = values.iter().map(|x| x * x).sum();
    let loo: Vec<f64> = values
        .iter()
        .map(|&x| {
            let a = s1 - x;
            ((s2 - x * x - a * a / (nf - 1.0)) / (nf - 2.0)).max(0.0).sqrt()
        })
        .collect();
    let m = mean(&loo);
    ((nf - 1.0) / nf * loo.iter().map(|s| (s - m).powi(2)).sum::<f64>()).sqrt()
}

pub fn rmse(values: &[f64], truth: f64) -> f64 {
    (values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Per-run estimates and sample counts for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResults {
    pub name: String,
    pub samples: Vec<usize>,
    /// `values[run][estimator]`.
    pub values: Vec<Vec<f64>>,
}

impl ArmResults {
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }

    pub fn mean_samples(&self) -> f64 {
        self.samples.iter().sum::<usize>() as f64 / self.samples.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: EstimatorId,
    pub mean: f64,
    /// Standard error of the mean.
    pub mean_se: f64,
    pub std: f64,
    /// Jackknife uncertainty of `std`.
    pub std_unc: f64,
    pub truth: Option<f64>,
    pub rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub name: String,
    pub n_runs: usize,
    pub mean_samples: f64,
    pub estimators: Vec<EstimatorSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub arm: String,
    pub baseline: String,
    pub gains: Vec<Option<Gain>>,
}

/// Repeated-run statistics for every arm plus gains against a baseline arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub estimators: Vec<EstimatorId>,
    pub arms: Vec<ArmSummary>,
    pub gains: Vec<GainRow>,
}

impl ExperimentReport {
    /// Summarise arms; gains are computed for every arm other than
    /// `baseline` against it. A gain is `None` when the arm's results have
    /// zero variance.
    pub fn build(model: &ModelSpec, estimators: &[EstimatorId], arms: &[ArmResults], baseline: usize) -> Result<Self> {
        let base = arms.get(baseline).ok_or_else(|| Error::Config("baseline arm out of range".into()))?;
        let mut summaries = Vec::with_capacity(arms.len());
        for arm in arms {
            if arm.values.len() < 2 {
                return Err(Error::Config(format!("arm '{}' needs at least 2 runs", arm.name)));
            }
            let estimators = estimators
                .iter()
                .enumerate()
                .map(|(k, &id)| {
                    let col = arm.column(k);
                    let std = variance(&col).sqrt();
                    let truth = analytic_value(model, id);
                    EstimatorSummary {
                        estimator: id,
                        mean: mean(&col),
                        mean_se: std / (col.len() as f64).sqrt(),
                        std,
                        std_unc: std_dev_uncertainty(&col),
                        truth,
                        rmse: truth.map(|t| rmse(&col, t)),
                    }
                })
                .collect();
            summaries.push(ArmSummary {
                name: arm.name.clone(),
                n_runs: arm.values.len(),
                mean_samples: arm.mean_samples(),
                estimators,
            });
        }
        let mut gains = Vec::new();
        for (a, arm) in arms.iter().enumerate() {
            if a == baseline {
                continue;
            }
            let row = (0..estimators.len())
                .map(|k| efficiency_gain(&base.column(k), &arm.column(k), base.mean_samples(), arm.mean_samples()).ok())
                .collect();
            gains.push(GainRow {
                arm: arm.name.clone(),
                baseline: base.name.clone(),
                gains: row,
            });
        }
        Ok(Self {
            estimators: estimators.to_vec(),
            arms: summaries,
            gains,
        })
    }

    pub fn arm(&self, name: &str) -> Option<&ArmSummary> {
        self.arms.iter().find(|a| a.name == name)
    }

    pub fn gain(&self, arm: &str, id: EstimatorId) -> Option<Gain> {
        let k = self.estimators.iter().position(|&e| e == id)?;
        self.gains.iter().find(|g| g.arm == arm)?.gains[k]
    }

    /// CSV with one row per (statistic, arm). Each estimator has a value
    /// column and an `_unc` column holding its 1σ uncertainty: the standard
    /// error for `mean`, the jackknife error for `std`, the bootstrap error
    /// for `gain`; `rmse` rows leave it empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,arm,samples");
        for e in &self.estimators {
            let _ = write!(out, ",{0},{0}_unc", e.name());
        }
        out.push('\n');
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for (kind, pick) in [
            ("mean", (|s: &EstimatorSummary| (Some(s.mean), Some(s.mean_se))) as fn(&EstimatorSummary) -> (Option<f64>, Option<f64>)),
            ("std", |s| (Some(s.std), Some(s.std_unc))),
            ("rmse", |s| (s.rmse, None)),
        ] {
            for arm in &self.arms {
                let _ = write!(out, "{kind},{},{}", arm.name, arm.mean_samples);
                for s in &arm.estimators {
                    let (v, u) = pick(s);
                    let _ = write!(out, ",{},{}", fmt(v), fmt(u));
                }
                out.push('\n');
            }
        }
        for g in &self.gains {
            let _ = write!(out, "gain,{},", g.arm);
            for x in &g.gains {
                let _ = write!(out, ",{},{}", fmt(x.map(|x| x.gain)), fmt(x.map(|x| x.sigma)));
            }
            out.push('\n');
        }
        out
    }
}
