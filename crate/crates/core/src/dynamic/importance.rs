//! Per-point importance: where extra live points most reduce the error of
//! the evidence or of parameter estimates.

use serde::{Deserialize, Serialize};

use super::{GoalConfig, ImportanceVariant};
use crate::error::{Error, Result};
use crate::numerics::{log_add_exp, normalize, normalize_log_weights};
use crate::run::{NestedRun, RunWeights, SamplePoint};

/// Importances aligned with the run's points; each vector sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceProfile {
    pub imp_z: Vec<f64>,
    pub imp_param: Vec<f64>,
    /// `(1 - G) imp_z + G imp_param`.
    pub combined: Vec<f64>,
}

fn degenerate() -> Error {
    Error::Degenerate("all importances are zero".into())
}

/// `ln Z_{≥i}` for every `i`, by a reverse log-sum-exp sweep.
fn log_tail_sums(log_lw: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; log_lw.len()];
    let mut acc = f64::NEG_INFINITY;
    for i in (0..log_lw.len()).rev() {
        acc = log_add_exp(acc, log_lw[i]);
        out[i] = acc;
    }
    out
}

pub(crate) fn evidence_from_weights(w: &RunWeights) -> Result<Vec<f64>> {
    let tail = log_tail_sums(&w.log_lw);
    let log_imp: Vec<f64> = tail.iter().zip(&w.n_live).map(|(z, &n)| z - (n as f64).ln()).collect();
    normalize_log_weights(&log_imp).ok_or_else(degenerate)
}

pub(crate) fn evidence_exact_from_weights(w: &RunWeights) -> Result<Vec<f64>> {
    let tail = log_tail_sums(&w.log_lw);
    let k = w.log_lw.len();
    let log_imp: Vec<f64> = (0..k)
        .map(|i| {
            let n = w.n_live[i] as f64;
            let above = if i + 1 < k { tail[i + 1] } else { f64::NEG_INFINITY };
            let c_above = ((n + 1.0) / (n.sqrt() * (n + 2.0).powf(1.5))).ln();
            let c_here = (n.sqrt() / (n + 2.0).powf(1.5)).ln();
            log_add_exp(c_above + above, c_here + w.log_lw[i])
        })
        .collect();
    normalize_log_weights(&log_imp).ok_or_else(degenerate)
}

pub(crate) fn param_from_weights(w: &RunWeights) -> Result<Vec<f64>> {
    normalize_log_weights(&w.log_lw).ok_or_else(degenerate)
}

pub(crate) fn tuned_from_weights(w: &RunWeights, values: &[f64], global_mean: f64) -> Result<Vec<f64>> {
    if values.len() != w.log_lw.len() {
        return Err(Error::domain("target values are not aligned with the run"));
    }
    let p = param_from_weights(w)?;
    let raw: Vec<f64> = p.iter().zip(values).map(|(p, v)| p * (v - global_mean).abs()).collect();
    normalize(&raw).ok_or_else(degenerate)
}

/// Evidence importance `∝ Z_{≥i} / n_i`.
pub fn importance_evidence(run: &NestedRun) -> Result<Vec<f64>> {
    evidence_from_weights(&run.weights()?)
}

/// Evidence importance from the expected reduction in evidence error per
/// extra live point:
/// `∝ (n+1) / (n^{1/2} (n+2)^{3/2}) Z_{>i} + n^{1/2} / (n+2)^{3/2} L_i w_i`.
pub fn importance_evidence_exact(run: &NestedRun) -> Result<Vec<f64>> {
    evidence_exact_from_weights(&run.weights()?)
}

/// Parameter importance `∝ L_i w_i`, i.e. the posterior weights.
pub fn importance_param(run: &NestedRun) -> Result<Vec<f64>> {
    param_from_weights(&run.weights()?)
}

/// Parameter importance tuned to one quantity: `∝ |f_i - E[f]| L_i w_i`.
/// Errors when every weighted deviation is zero.
pub fn importance_tuned(run: &NestedRun, target_values: &[f64], global_mean: f64) -> Result<Vec<f64>> {
    tuned_from_weights(&run.weights()?, target_values, global_mean)
}

pub(crate) fn profile_from_weights(points: &[SamplePoint], w: &RunWeights, goal: &GoalConfig) -> Result<ImportanceProfile> {
    goal.validate()?;
    if points.is_empty() {
        return Err(Error::EmptyRun);
    }
    let imp_z = match goal.importance {
        ImportanceVariant::Exact => evidence_exact_from_weights(w)?,
        _ => evidence_from_weights(w)?,
    };
    let imp_param = match goal.importance {
        ImportanceVariant::Tuned => {
            let f = goal.target().point_function().expect("validated tuned target");
            let values: Vec<f64> = points.iter().map(|p| f(p.theta1, p.radius)).collect();
            let p = param_from_weights(w)?;
            let global_mean: f64 = p.iter().zip(&values).map(|(p, v)| p * v).sum();
            match tuned_from_weights(w, &values, global_mean) {
                Ok(t) => t,
                Err(Error::Degenerate(_)) => p,
                Err(e) => return Err(e),
            }
        }
        _ => param_from_weights(w)?,
    };
    let g = goal.g;
    let combined = imp_z.iter().zip(&imp_param).map(|(z, p)| (1.0 - g) * z + g * p).collect();
    Ok(ImportanceProfile {
        imp_z,
        imp_param,
        combined,
    })
}

/// Only the goal-weighted mixture, skipping a term whose weight is zero.
pub(crate) fn combined_from_weights(points: &[SamplePoint], w: &RunWeights, goal: &GoalConfig) -> Result<Vec<f64>> {
    if goal.g == 1.0 && goal.importance != ImportanceVariant::Tuned {
        return param_from_weights(w);
    }
    if goal.g == 0.0 {
        return match goal.importance {
            ImportanceVariant::Exact => evidence_exact_from_weights(w),
            _ => evidence_from_weights(w),
        };
    }
    Ok(profile_from_weights(points, w, goal)?.combined)
}

/// Evidence and parameter importances and their goal-weighted mixture.
pub fn combined_importance(run: &NestedRun, goal: &GoalConfig) -> Result<ImportanceProfile> {
    profile_from_weights(run.points(), &run.weights()?, goal)
}
