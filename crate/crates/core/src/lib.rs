//! Standard and dynamic nested sampling for spherically symmetric models
//! where exact sampling inside likelihood contours is possible.
//!
//! The crate is organised bottom-up:
//!
//! - [`specialfn`]: incomplete gamma functions and sphere-coordinate draws.
//! - [`model`]: analytic likelihood/prior geometry (radius, log-likelihood,
//!   log prior volume) and quadrature oracles.
//! - [`run`]: the nested sampling run data model, derived live-point counts,
//!   prior volumes, weights, combining and thread decomposition.
//! - [`sampler`]: perfect draws inside contours, threads, standard runs.
//! - [`dynamic`]: importance functions and both dynamic allocation algorithms.
//! - [`analysis`]: estimators, information content, thread bootstrap and
//!   efficiency gains.
//! - [`io`]: JSON run files.
//! - [`experiment`]: batch orchestration and the report tables used by the
//!   `dynns` binary.

pub mod analysis;
pub mod dynamic;
pub mod error;
pub mod experiment;
pub mod io;
pub mod model;
pub mod numerics;
pub mod run;
pub mod sampler;
pub mod specialfn;

pub use error::{Error, Result};
pub use model::{Family, ModelSpec};
pub use run::{NestedRun, Provenance, SamplePoint, Thread};
