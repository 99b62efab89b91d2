//! Posterior and evidence estimators over nested sampling runs.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Family, ModelSpec};
use crate::numerics::{log_sum_exp, normalize_log_weights};
use crate::run::NestedRun;
use crate::specialfn::{inv_reg_lower_inc_gamma, log_gamma};

/// A scalar computed from a weighted run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimatorId {
    LogZ,
    MeanTheta1,
    MedianTheta1,
    /// One-tailed credible bound: the `q` posterior quantile of `θ₁`.
    CredibleTheta1(f64),
    SecondMomentTheta1,
    MeanRadius,
    MedianRadius,
}

impl EstimatorId {
    /// Evidence plus the parameter summaries used in the comparison tables.
    pub const TABLE: [EstimatorId; 6] = [
        EstimatorId::LogZ,
        EstimatorId::MeanTheta1,
        EstimatorId::MedianTheta1,
        EstimatorId::CredibleTheta1(0.84),
        EstimatorId::MeanRadius,
        EstimatorId::MedianRadius,
    ];

    /// [`Self::TABLE`] with the second moment of `θ₁` added.
    pub const ALL: [EstimatorId; 7] = [
        EstimatorId::LogZ,
        EstimatorId::MeanTheta1,
        EstimatorId::MedianTheta1,
        EstimatorId::CredibleTheta1(0.84),
        EstimatorId::SecondMomentTheta1,
        EstimatorId::MeanRadius,
        EstimatorId::MedianRadius,
    ];

    pub fn validate(&self) -> Result<()> {
        match *self {
            EstimatorId::CredibleTheta1(q) if !(q > 0.0 && q < 1.0) => {
                Err(Error::domain(format!("credible level must lie in (0, 1), got {q}")))
            }
            _ => Ok(()),
        }
    }

    /// Stable column name, e.g. `ci84_theta1`.
    pub fn name(&self) -> String {
        match *self {
            EstimatorId::LogZ => "log_z".into(),
            EstimatorId::MeanTheta1 => "mean_theta1".into(),
            EstimatorId::MedianTheta1 => "median_theta1".into(),
            EstimatorId::CredibleTheta1(q) => format!("ci{}_theta1", fmt_level(q)),
            EstimatorId::SecondMomentTheta1 => "second_moment_theta1".into(),
            EstimatorId::MeanRadius => "mean_radius".into(),
            EstimatorId::MedianRadius => "median_radius".into(),
        }
    }

    /// Per-point function whose posterior mean this estimator is, when it is
    /// a mean.
    pub fn point_function(&self) -> Option<fn(f64, f64) -> f64> {
        match self {
            EstimatorId::MeanTheta1 => Some(|t, _| t),
            EstimatorId::SecondMomentTheta1 => Some(|t, _| t * t),
            EstimatorId::MeanRadius => Some(|_, r| r),
            _ => None,
        }
    }
}

fn fmt_level(q: f64) -> String {
    let pct = q * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}").replace('.', "p")
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s {
            "log_z" => EstimatorId::LogZ,
            "mean_theta1" => EstimatorId::MeanTheta1,
            "median_theta1" => EstimatorId::MedianTheta1,
            "second_moment_theta1" => EstimatorId::SecondMomentTheta1,
            "mean_radius" => EstimatorId::MeanRadius,
            "median_radius" => EstimatorId::MedianRadius,
            other => {
                let level = other
                    .strip_prefix("ci")
                    .and_then(|r| r.strip_suffix("_theta1"))
                    .ok_or_else(|| Error::Config(format!("unknown estimator '{other}'")))?;
                let pct: f64 = level
                    .replace('p', ".")
                    .parse()
                    .map_err(|_| Error::Config(format!("bad credible level in '{other}'")))?;
                EstimatorId::CredibleTheta1(pct / 100.0)
            }
        };
        id.validate()?;
        Ok(id)
    }
}

impl TryFrom<String> for EstimatorId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EstimatorId> for String {
    fn from(id: EstimatorId) -> String {
        id.name()
    }
}

/// Quantile of weighted values. Each sorted value sits at the midpoint of its
/// cumulative weight, `Σ_{k<i} w_k + w_i / 2`; targets between midpoints are
/// interpolated linearly and targets outside clamp to the extremes. With equal
/// weights this is the ordinary midpoint-convention sample quantile.
pub fn weighted_quantile(values: &[f64], weights: &[f64], q: f64) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::domain("values and weights differ in length"));
    }
    if values.is_empty() {
        return Err(Error::EmptyRun);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("quantile must lie in [0, 1], got {q}")));
    }
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| weights[i] > 0.0).collect();
    if idx.is_empty() {
        return Err(Error::Degenerate("all weights are zero".into()));
    }
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = idx.iter().map(|&i| weights[i]).sum();
    let target = q * total;
    let mut cum = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for &i in &idx {
        let mid = cum + 0.5 * weights[i];
        cum += weights[i];
        if target <= mid {
            return Ok(match prev {
                None => values[i],
                Some((pm, pv)) => pv + (values[i] - pv) * (target - pm) / (mid - pm),
            });
        }
        prev = Some((mid, values[i]));
    }
    Ok(values[*idx.last().unwrap()])
}

/// `ln Z` by the weighted quadrature sum over all points.
pub fn log_evidence_estimate(run: &NestedRun) -> Result<f64> {
    let w = run.weights()?;
    Ok(log_sum_exp(&w.log_lw))
}

/// Several estimators from one weight computation.
pub fn estimate_many(run: &NestedRun, ids: &[EstimatorId]) -> Result<Vec<f64>> {
    let w = run.weights()?;
    let p = normalize_log_weights(&w.log_lw).ok_or_else(|| Error::Degenerate("all posterior weights are zero".into()))?;
    let pts = run.points();
    let mut theta: Option<Vec<f64>> = None;
    let mut radius: Option<Vec<f64>> = None;
    ids.iter()
        .map(|id| {
            id.validate()?;
            Ok(match *id {
                EstimatorId::LogZ => log_sum_exp(&w.log_lw),
                EstimatorId::MeanTheta1 => pts.iter().zip(&p).map(|(x, p)| p * x.theta1).sum(),
                EstimatorId::SecondMomentTheta1 => pts.iter().zip(&p).map(|(x, p)| p * x.theta1 * x.theta1).sum(),
                EstimatorId::MeanRadius => pts.iter().zip(&p).map(|(x, p)| p * x.radius).sum(),
                EstimatorId::MedianTheta1 | EstimatorId::CredibleTheta1(_) => {
                    let q = if let EstimatorId::CredibleTheta1(q) = *id { q } else { 0.5 };
                    let v = theta.get_or_insert_with(|| pts.iter().map(|x| x.theta1).collect());
                    weighted_quantile(v, &p, q)?
                }
                EstimatorId::MedianRadius => {
                    let v = radius.get_or_insert_with(|| pts.iter().map(|x| x.radius).collect());
                    weighted_quantile(v, &p, 0.5)?
                }
            })
        })
        .collect()
}

pub fn estimate(run: &NestedRun, id: EstimatorId) -> Result<f64> {
    Ok(estimate_many(run, &[id])?[0])
}

/// `exp(-Σ p ln p)`, the effective number of equally weighted samples.
pub fn information_content(run: &NestedRun) -> Result<f64> {
    let p = run.posterior_weights()?;
    Ok(entropy_count(&p))
}

/// `exp(-Σ p ln p)` for normalised weights; zero weights contribute nothing.
pub fn entropy_count(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    h.exp()
}

/// Exact value of an estimator's target where a closed form is available:
/// every Gaussian quantity, `ln Z` for all families (by quadrature outside the
/// Gaussian case) and the symmetric `θ₁` location statistics.
pub fn analytic_value(model: &ModelSpec, id: EstimatorId) -> Option<f64> {
    match id {
        EstimatorId::LogZ => return Some(model.analytic_log_evidence()),
        EstimatorId::MeanTheta1 | EstimatorId::MedianTheta1 => return Some(0.0),
        _ => {}
    }
    if model.family() != Family::Gaussian {
        return None;
    }
    let s2 = model.sigma_pi().powi(2) / (1.0 + model.sigma_pi().powi(2));
    let s = s2.sqrt();
    let half_d = 0.5 * model.dim() as f64;
    Some(match id {
        EstimatorId::CredibleTheta1(q) => {
            let z = (2.0 * inv_reg_lower_inc_gamma(0.5, (2.0 * q - 1.0).abs()).ok()?).sqrt();
            if q >= 0.5 {
                s * z
            } else {
                -s * z
            }
        }
        EstimatorId::SecondMomentTheta1 => s2,
        EstimatorId::MeanRadius => s * SQRT_2 * (log_gamma(half_d + 0.5).ok()? - log_gamma(half_d).ok()?).exp(),
        EstimatorId::MedianRadius => s * (2.0 * inv_reg_lower_inc_gamma(half_d, 0.5).ok()?).sqrt(),
        _ => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::{Provenance, SamplePoint};

    fn model() -> ModelSpec {
        ModelSpec::gaussian(2, 1.0).unwrap()
    }

    fn one_thread(log_ls: &[f64], theta: &[f64]) -> NestedRun {
        let mut birth = f64::NEG_INFINITY;
        let pts = log_ls
            .iter()
            .zip(theta)
            .map(|(&l, &t)| {
                let p = SamplePoint {
                    log_l: l,
                    birth_log_l: birth,
                    theta1: t,
                    radius: t.abs().max(1.0),
                    true_log_x: 0.0,
                    thread_id: 0,
                };
                birth = l;
                p
            })
            .collect();
        NestedRun::from_points(pts, model(), Provenance::new(0, "t")).unwrap()
    }

    #[test]
    fn quantile_equal_weights_is_median() {
        assert_eq!(weighted_quantile(&[3.0, 1.0, 2.0], &[1.0; 3], 0.5).unwrap(), 2.0);
        assert_eq!(weighted_quantile(&[1.0, 2.0, 3.0, 4.0], &[1.0; 4], 0.5).unwrap(), 2.5);
        assert_eq!(weighted_quantile(&[1.0, 2.0], &[1.0; 2], 0.0).unwrap(), 1.0);
        assert_eq!(weighted_quantile(&[1.0, 2.0], &[1.0; 2], 1.0).unwrap(), 2.0);
    }

    #[test]
    fn quantile_weighted_interpolation() {
        // midpoints at 0.125 and 0.625 of total weight 1.0 (weights 0.25, 0.75)
        let v = weighted_quantile(&[0.0, 1.0], &[0.25, 0.75], 0.375).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(weighted_quantile(&[1.0], &[0.0], 0.5).is_err());
        assert!(weighted_quantile(&[], &[], 0.5).is_err());
    }

    #[test]
    fn single_point_log_evidence() {
        let r = one_thread(&[1.3], &[0.0]);
        assert!((log_evidence_estimate(&r).unwrap() - (0.5f64.ln() + 1.3)).abs() < 1e-14);
    }

    #[test]
    fn information_content_cases() {
        assert!((entropy_count(&[0.25; 4]) - 4.0).abs() < 1e-12);
        assert!((entropy_count(&[0.5, 0.25, 0.25]) - 2f64.powf(1.5)).abs() < 1e-12);
        let eps = 1e-12;
        assert!((entropy_count(&[1.0 - eps, eps]) - 1.0).abs() < 1e-9);
        let r = one_thread(&[0.0, 1.0, 2.0], &[0.1, 0.2, 0.3]);
        let h = information_content(&r).unwrap();
        assert!((1.0..=3.0).contains(&h));
    }

    #[test]
    fn estimate_means_and_medians() {
        let r = one_thread(&[0.0, 1.0, 2.0], &[-1.0, 0.5, 2.0]);
        let p = r.posterior_weights().unwrap();
        let mean: f64 = [-1.0, 0.5, 2.0].iter().zip(&p).map(|(t, p)| t * p).sum();
        assert!((estimate(&r, EstimatorId::MeanTheta1).unwrap() - mean).abs() < 1e-14);
        let all = estimate_many(&r, &EstimatorId::ALL).unwrap();
        assert_eq!(all.len(), 7);
        assert!(all[3] >= all[2]);
        assert!(estimate(&r, EstimatorId::CredibleTheta1(1.0)).is_err());
    }

    #[test]
    fn names_round_trip() {
        for id in EstimatorId::ALL.into_iter().chain([EstimatorId::CredibleTheta1(0.975)]) {
            assert_eq!(id.name().parse::<EstimatorId>().unwrap(), id);
        }
        assert_eq!(EstimatorId::CredibleTheta1(0.84).name(), "ci84_theta1");
        let json = serde_json::to_string(&EstimatorId::ALL).unwrap();
        let back: Vec<EstimatorId> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, EstimatorId::ALL);
        assert!("mode_theta1".parse::<EstimatorId>().is_err());
    }

    #[test]
    fn gaussian_truths() {
        let m = ModelSpec::gaussian(3, 10.0).unwrap();
        let s = (100.0f64 / 101.0).sqrt();
        let ci = analytic_value(&m, EstimatorId::CredibleTheta1(0.84)).unwrap();
        assert!((ci - s * 0.994_457_883_2).abs() < 1e-8);
        assert!((ci - 0.9895).abs() < 1e-3);
        let med = analytic_value(&m, EstimatorId::MedianRadius).unwrap();
        assert!((med - s * 1.538_172).abs() < 1e-5);
        // mean of a chi distribution with 3 degrees of freedom is 2 sqrt(2/π)
        let mean_r = analytic_value(&m, EstimatorId::MeanRadius).unwrap();
        assert!((mean_r - s * 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert_eq!(analytic_value(&m, EstimatorId::SecondMomentTheta1).unwrap(), s * s);
        let c = ModelSpec::cauchy(10, 10.0).unwrap();
        assert!(analytic_value(&c, EstimatorId::MedianRadius).is_none());
        assert_eq!(analytic_value(&c, EstimatorId::MeanTheta1), Some(0.0));
    }
}
