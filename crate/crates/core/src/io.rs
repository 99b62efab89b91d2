//! Run files: JSON with points stored as parallel arrays.
//!
//! JSON has no infinities, so the `-inf` birth contour of threads that start
//! by sampling the whole prior is written as `null`.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::run::{NestedRun, OpenLivePoint, Provenance, SamplePoint};

pub const RUN_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PointArrays {
    log_l: Vec<f64>,
    birth_log_l: Vec<Option<f64>>,
    theta1: Vec<f64>,
    radius: Vec<f64>,
    true_log_x: Vec<f64>,
    thread_id: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct OpenLiveRepr {
    thread_id: u32,
    birth_log_l: Option<f64>,
}

/// Everything describing how a run was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub model: ModelSpec,
    pub provenance: Provenance,
    /// Free-form generation settings, e.g. the experiment arm.
    #[serde(default)]
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RunFile {
    version: u32,
    metadata: RunMetadata,
    points: PointArrays,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    open_live: Vec<OpenLiveRepr>,
}

fn encode(x: f64) -> Option<f64> {
    if x == f64::NEG_INFINITY {
        None
    } else {
        Some(x)
    }
}

fn decode(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NEG_INFINITY)
}

/// Serialise a run with arbitrary extra settings attached.
pub fn run_to_json(run: &NestedRun, config: serde_json::Value) -> Result<String> {
    let pts = run.points();
    let file = RunFile {
        version: RUN_FILE_VERSION,
        metadata: RunMetadata {
            model: run.model().clone(),
            provenance: run.provenance().clone(),
            config,
        },
        points: PointArrays {
            log_l: pts.iter().map(|p| p.log_l).collect(),
            birth_log_l: pts.iter().map(|p| encode(p.birth_log_l)).collect(),
            theta1: pts.iter().map(|p| p.theta1).collect(),
            radius: pts.iter().map(|p| p.radius).collect(),
            true_log_x: pts.iter().map(|p| p.true_log_x).collect(),
            thread_id: pts.iter().map(|p| p.thread_id).collect(),
        },
        open_live: run
            .open_live()
            .iter()
            .map(|o| OpenLiveRepr {
                thread_id: o.thread_id,
                birth_log_l: encode(o.birth_log_l),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&file)?)
}

/// Parse and validate a run.
pub fn run_from_json(text: &str) -> Result<(NestedRun, RunMetadata)> {
    let file: RunFile = serde_json::from_str(text)?;
    if file.version != RUN_FILE_VERSION {
        return Err(Error::InvalidRun(format!("unsupported run file version {}", file.version)));
    }
    let a = &file.points;
    let n = a.log_l.len();
    if [a.birth_log_l.len(), a.theta1.len(), a.radius.len(), a.true_log_x.len(), a.thread_id.len()]
        .iter()
        .any(|&l| l != n)
    {
        return Err(Error::InvalidRun("point arrays differ in length".into()));
    }
    let points: Vec<SamplePoint> = (0..n)
        .map(|i| SamplePoint {
            log_l: a.log_l[i],
            birth_log_l: decode(a.birth_log_l[i]),
            theta1: a.theta1[i],
            radius: a.radius[i],
            true_log_x: a.true_log_x[i],
            thread_id: a.thread_id[i],
        })
        .collect();
    let open: Vec<OpenLivePoint> = file
        .open_live
        .iter()
        .map(|o| OpenLivePoint {
            thread_id: o.thread_id,
            birth_log_l: decode(o.birth_log_l),
        })
        .collect();
    let run = NestedRun::from_points(points, file.metadata.model.clone(), file.metadata.provenance.clone())?
        .with_open_live(open)?;
    Ok((run, file.metadata))
}

pub fn save_run(path: &Path, run: &NestedRun, config: serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, run_to_json(run, config)?).map_err(|e| Error::io(path, e))
}

pub fn load_run(path: &Path) -> Result<(NestedRun, RunMetadata)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    run_from_json(&text)
}
