//! Dynamic nested sampling: importance functions and the two live-point
//! allocation algorithms.
//!
//! [`algorithm1`] grows a run iteratively, adding threads where the current
//! importance is highest. [`algorithm2`] computes one smoothed allocation from
//! an exploratory run and realises it in a single pass.

pub mod algorithm1;
pub mod algorithm2;
pub mod importance;
pub mod savgol;

use serde::{Deserialize, Serialize};

use crate::analysis::EstimatorId;
use crate::error::{Error, Result};

pub use algorithm1::{dynamic_run_algorithm1, AlgorithmOneConfig};
pub use algorithm2::{dynamic_run_algorithm2, AlgorithmTwoConfig};
pub use importance::{
    combined_importance, importance_evidence, importance_evidence_exact, importance_param, importance_tuned,
    ImportanceProfile,
};
pub use savgol::savitzky_golay_smooth;

/// Which importance functions drive the allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceVariant {
    /// Evidence importance `Z_{≥i} / n_i`, parameter importance `L_i w_i`.
    #[default]
    Standard,
    /// Evidence importance from the expected error reduction of one extra
    /// live point.
    Exact,
    /// Parameter importance weighted by `|f(θ_i) - E[f]|` for a target
    /// quantity `f`.
    Tuned,
}

/// What the run should be optimised for: `g = 0` is pure evidence, `g = 1`
/// pure parameter estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalConfig {
    pub g: f64,
    #[serde(default)]
    pub importance: ImportanceVariant,
    /// Quantity targeted by [`ImportanceVariant::Tuned`]; must be a posterior
    /// mean. Defaults to the mean of `θ₁`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuned_target: Option<EstimatorId>,
}

impl GoalConfig {
    pub fn new(g: f64) -> Self {
        Self {
            g,
            importance: ImportanceVariant::Standard,
            tuned_target: None,
        }
    }

    pub fn tuned(g: f64, target: EstimatorId) -> Self {
        Self {
            g,
            importance: ImportanceVariant::Tuned,
            tuned_target: Some(target),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.g) {
            return Err(Error::Config(format!("goal G must lie in [0, 1], got {}", self.g)));
        }
        if let Some(t) = self.tuned_target {
            if t.point_function().is_none() {
                return Err(Error::Config(format!("tuned target '{t}' is not a posterior mean")));
            }
        }
        Ok(())
    }

    pub(crate) fn target(&self) -> EstimatorId {
        self.tuned_target.unwrap_or(EstimatorId::MeanTheta1)
    }
}
