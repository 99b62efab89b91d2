//! Estimators, thread bootstrap errors and efficiency gains.

pub mod bootstrap;
pub mod estimators;
pub mod gain;

pub use bootstrap::{bootstrap_error, bootstrap_errors, bootstrap_resample, BootstrapError, BootstrapSettings};
pub use estimators::{
    analytic_value, entropy_count, estimate, estimate_many, information_content, log_evidence_estimate, weighted_quantile,
    EstimatorId,
};
pub use gain::{efficiency_gain, ArmResults, ExperimentReport, Gain};
