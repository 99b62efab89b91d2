//! Batch experiments: configuration, deterministic run generation, run files
//! on disk and the report tables built from them.
//!
//! Run `r` of arm `a` always draws from RNG stream `(a << 32) | r` of the
//! experiment seed (`a` being the arm's position unless overridden), so
//! outputs are identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::bootstrap::{bootstrap_errors, BootstrapSettings};
use crate::analysis::estimators::{analytic_value, estimate_many, EstimatorId};
use crate::analysis::gain::{ArmResults, ExperimentReport};
use crate::dynamic::{dynamic_run_algorithm1, dynamic_run_algorithm2, AlgorithmOneConfig, AlgorithmTwoConfig, GoalConfig};
use crate::error::{Error, Result};
use crate::io::{load_run, save_run};
use crate::model::ModelSpec;
use crate::numerics::{mean, std_dev};
use crate::run::NestedRun;
use crate::sampler::{standard_run, stream_rng, SamplerConfig, DEFAULT_TERMINATION_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Standard,
    /// Iterative thread addition.
    Dyn1,
    /// Single-pass smoothed allocation.
    Dyn2,
}

/// Sample budget of a dynamic arm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetRule {
    /// Mean realised sample count of the baseline standard arm.
    #[default]
    MatchBaseline,
    Samples(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub name: String,
    pub method: Method,
    /// Live points of a standard arm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_live: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<GoalConfig>,
    /// Exploratory live points; defaults to 10% of the baseline's `n_live`
    /// for `dyn1` and 20% for `dyn2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_init: Option<usize>,
    #[serde(default)]
    pub budget: BudgetRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_batch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    /// Overrides the experiment-wide `n_runs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_runs: Option<usize>,
    /// RNG stream family of this arm; defaults to its position. Arms sharing
    /// a stream and settings produce identical runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<u32>,
}

impl ArmConfig {
    pub fn standard(name: &str, n_live: usize) -> Self {
        Self {
            name: name.into(),
            method: Method::Standard,
            n_live: Some(n_live),
            goal: None,
            n_init: None,
            budget: BudgetRule::MatchBaseline,
            n_batch: None,
            fraction: None,
            n_runs: None,
            stream: None,
        }
    }

    pub fn dynamic(name: &str, method: Method, goal: GoalConfig) -> Self {
        Self {
            name: name.into(),
            method,
            n_live: None,
            goal: Some(goal),
            n_init: None,
            budget: BudgetRule::MatchBaseline,
            n_batch: None,
            fraction: None,
            n_runs: None,
            stream: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub arms: Vec<ArmConfig>,
    pub n_runs: usize,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorId>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub bootstrap: BootstrapSettings,
    /// Arm that gains are measured against and budgets matched to; defaults
    /// to the first standard arm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    /// Arm analysed by the bootstrap table; defaults to the first dynamic arm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_arm: Option<String>,
    #[serde(default = "default_termination")]
    pub termination_fraction: f64,
    #[serde(default = "default_true")]
    pub keep_final_live: bool,
}

fn default_estimators() -> Vec<EstimatorId> {
    EstimatorId::TABLE.to_vec()
}

fn default_termination() -> f64 {
    DEFAULT_TERMINATION_FRACTION
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, arms: Vec<ArmConfig>, n_runs: usize, seed: u64) -> Self {
        Self {
            model,
            arms,
            n_runs,
            estimators: default_estimators(),
            seed,
            workers: 0,
            bootstrap: BootstrapSettings::default(),
            baseline: None,
            bootstrap_arm: None,
            termination_fraction: DEFAULT_TERMINATION_FRACTION,
            keep_final_live: true,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::Config("at least one arm is required".into()));
        }
        for (i, a) in self.arms.iter().enumerate() {
            if self.arms[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("duplicate arm name '{}'", a.name)));
            }
            if a.name.is_empty() || a.name.contains(['/', '\\', ',']) {
                return Err(Error::Config(format!("arm name '{}' is not usable in file names", a.name)));
            }
            if self.arm_runs(i) < 1 {
                return Err(Error::Config(format!("arm '{}' has no runs", a.name)));
            }
            match a.method {
                Method::Standard => {
                    if a.n_live.unwrap_or(0) < 1 {
                        return Err(Error::Config(format!("standard arm '{}' needs n_live >= 1", a.name)));
                    }
                }
                Method::Dyn1 | Method::Dyn2 => {
                    a.goal
                        .ok_or_else(|| Error::Config(format!("dynamic arm '{}' needs a goal", a.name)))?
                        .validate()?;
                    if a.budget == BudgetRule::MatchBaseline || a.n_init.is_none() {
                        self.baseline_index()?;
                    }
                }
            }
        }
        for e in &self.estimators {
            e.validate()?;
        }
        if let Some(b) = &self.bootstrap_arm {
            self.arm_index(b)?;
        }
        if !(self.termination_fraction > 0.0 && self.termination_fraction < 1.0) {
            return Err(Error::Config("termination_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn arm_index(&self, name: &str) -> Result<usize> {
        self.arms
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::Config(format!("no arm named '{name}'")))
    }

    pub fn arm_runs(&self, arm: usize) -> usize {
        self.arms[arm].n_runs.unwrap_or(self.n_runs)
    }

    pub fn baseline_index(&self) -> Result<usize> {
        let i = match &self.baseline {
            Some(name) => self.arm_index(name)?,
            None => self
                .arms
                .iter()
                .position(|a| a.method == Method::Standard)
                .ok_or_else(|| Error::Config("no standard arm to use as baseline".into()))?,
        };
        if self.arms[i].method != Method::Standard {
            return Err(Error::Config("the baseline arm must be a standard arm".into()));
        }
        Ok(i)
    }

    fn n_init(&self, arm: &ArmConfig) -> Result<usize> {
        if let Some(n) = arm.n_init {
            return Ok(n);
        }
        let base = self.arms[self.baseline_index()?].n_live.unwrap_or(1);
        let pct = if arm.method == Method::Dyn2 { 5 } else { 10 };
        Ok((base / pct).max(1))
    }

    fn sampler_config(&self, n_live: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            n_live,
            termination_fraction: self.termination_fraction,
            keep_final_live: self.keep_final_live,
            seed,
        }
    }

    /// RNG stream of run `run` of arm `arm`.
    pub fn run_stream(&self, arm: usize, run: usize) -> u64 {
        let family = self.arms[arm].stream.map_or(arm as u64, u64::from);
        (family << 32) | run as u64
    }

    /// Generate one run. `budget` is the resolved sample budget of a dynamic
    /// arm and is ignored for standard arms.
    pub fn generate_run(&self, arm: usize, run: usize, budget: Option<usize>) -> Result<NestedRun> {
        let a = &self.arms[arm];
        let stream = self.run_stream(arm, run);
        let mut rng = stream_rng(self.seed, stream);
        let need_budget = || budget.ok_or_else(|| Error::Config(format!("arm '{}' has no resolved budget", a.name)));
        let mut out = match a.method {
            Method::Standard => standard_run(&self.model, &self.sampler_config(a.n_live.unwrap_or(1), self.seed), &mut rng)?,
            Method::Dyn1 => {
                let mut cfg = AlgorithmOneConfig::new(self.n_init(a)?, need_budget()?);
                cfg.n_batch = a.n_batch.unwrap_or(1);
                if let Some(f) = a.fraction {
                    cfg.fraction = f;
                }
                cfg.seed = self.seed;
                dynamic_run_algorithm1(&self.model, a.goal.as_ref().unwrap(), &cfg, &mut rng)?
            }
            Method::Dyn2 => {
                let mut cfg = AlgorithmTwoConfig::new(self.n_init(a)?, need_budget()?);
                cfg.seed = self.seed;
                dynamic_run_algorithm2(&self.model, a.goal.as_ref().unwrap(), &cfg, &mut rng)?
            }
        };
        out.provenance_mut().seed = self.seed;
        Ok(out)
    }

    /// Generate every run of an arm in parallel and map each through `f`,
    /// keeping run order.
    pub fn map_arm<T: Send>(&self, arm: usize, budget: Option<usize>, f: impl Fn(usize, NestedRun) -> Result<T> + Sync) -> Result<Vec<T>> {
        (0..self.arm_runs(arm))
            .into_par_iter()
            .map(|r| f(r, self.generate_run(arm, r, budget)?))
            .collect()
    }

    /// Budget of a dynamic arm given the baseline's realised sample counts.
    pub fn resolve_budget(&self, arm: usize, baseline_samples: Option<&[usize]>) -> Result<Option<usize>> {
        let a = &self.arms[arm];
        Ok(match (a.method, a.budget) {
            (Method::Standard, _) => None,
            (_, BudgetRule::Samples(n)) => Some(n),
            (_, BudgetRule::MatchBaseline) => {
                let s = baseline_samples.ok_or_else(|| Error::Config("baseline sample counts unavailable".into()))?;
                Some((s.iter().sum::<usize>() as f64 / s.len() as f64).round() as usize)
            }
        })
    }

    /// Arms in generation order: standard arms first so that dynamic budgets
    /// can be matched to them.
    fn generation_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.arms.len()).filter(|&i| self.arms[i].method == Method::Standard).collect();
        order.extend((0..self.arms.len()).filter(|&i| self.arms[i].method != Method::Standard));
        order
    }

    /// Generate every arm in memory, keeping only estimator values and
    /// sample counts.
    pub fn simulate(&self) -> Result<Vec<ArmResults>> {
        self.validate()?;
        let mut results: Vec<Option<ArmResults>> = vec![None; self.arms.len()];
        let base = self.baseline_index().ok();
        for arm in self.generation_order() {
            let base_samples = base.and_then(|b| results[b].as_ref().map(|r| r.samples.clone()));
            let budget = self.resolve_budget(arm, base_samples.as_deref())?;
            let rows = self.map_arm(arm, budget, |_, run| Ok((run.len(), estimate_many(&run, &self.estimators)?)))?;
            results[arm] = Some(ArmResults {
                name: self.arms[arm].name.clone(),
                samples: rows.iter().map(|r| r.0).collect(),
                values: rows.into_iter().map(|r| r.1).collect(),
            });
        }
        Ok(results.into_iter().map(Option::unwrap).collect())
    }

    /// Summary table with gains against the baseline arm.
    pub fn report(&self, arms: &[ArmResults]) -> Result<ExperimentReport> {
        ExperimentReport::build(&self.model, &self.estimators, arms, self.baseline_index()?)
    }
}

/// Run `f` on a pool with `workers` threads (0 = all cores).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// One generated run file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub arm: String,
    pub run_index: usize,
    /// Relative to the output directory.
    pub path: String,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmManifest {
    pub arm: String,
    pub n_runs: usize,
    pub mean_samples: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    /// Generating config with `workers` cleared.
    pub config: ExperimentConfig,
    pub arms: Vec<ArmManifest>,
    pub runs: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn run_path(arm: &str, run: usize) -> String {
    format!("runs/{arm}/run_{run:05}.json")
}

/// Generate every run, write one file per run plus a manifest, and return
/// the manifest.
pub fn cmd_generate(config: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    config.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let base = config.baseline_index().ok();
    let mut samples: Vec<Option<Vec<usize>>> = vec![None; config.arms.len()];
    let mut arm_manifests: Vec<Option<ArmManifest>> = vec![None; config.arms.len()];
    for arm in config.generation_order() {
        let budget = config.resolve_budget(arm, base.and_then(|b| samples[b].as_deref()))?;
        let a = &config.arms[arm];
        let meta = serde_json::json!({ "arm": a, "budget": budget });
        let counts = config.map_arm(arm, budget, |r, run| {
            save_run(&out.join(run_path(&a.name, r)), &run, meta.clone())?;
            Ok(run.len())
        })?;
        arm_manifests[arm] = Some(ArmManifest {
            arm: a.name.clone(),
            n_runs: counts.len(),
            mean_samples: counts.iter().sum::<usize>() as f64 / counts.len() as f64,
            budget,
        });
        samples[arm] = Some(counts);
    }
    let mut runs = Vec::new();
    for (arm, a) in config.arms.iter().enumerate() {
        for (r, &s) in samples[arm].as_ref().unwrap().iter().enumerate() {
            runs.push(ManifestEntry {
                arm: a.name.clone(),
                run_index: r,
                path: run_path(&a.name, r),
                samples: s,
            });
        }
    }
    let manifest = Manifest {
        version: 1,
        config: ExperimentConfig { workers: 0, ..config.clone() },
        arms: arm_manifests.into_iter().map(Option::unwrap).collect(),
        runs,
    };
    let path = out.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Check that every expected run file exists, listing all that do not.
fn expected_files(config: &ExperimentConfig, dir: &Path, arms: &[usize]) -> Result<Vec<Vec<PathBuf>>> {
    let mut missing = Vec::new();
    let files: Vec<Vec<PathBuf>> = arms
        .iter()
        .map(|&arm| {
            (0..config.arm_runs(arm))
                .map(|r| {
                    let rel = run_path(&config.arms[arm].name, r);
                    let p = dir.join(&rel);
                    if !p.is_file() {
                        missing.push(rel);
                    }
                    p
                })
                .collect()
        })
        .collect();
    if missing.is_empty() {
        Ok(files)
    } else {
        Err(Error::MissingRuns(missing))
    }
}

fn load_arm<T: Send>(paths: &[PathBuf], f: impl Fn(NestedRun) -> Result<T> + Sync) -> Result<Vec<T>> {
    paths.par_iter().map(|p| f(load_run(p)?.0)).collect()
}

/// Estimator statistics for every arm and gains against the baseline, read
/// from generated run files. Writes `report.csv` and `report.json` to `out`.
pub fn cmd_compare(config: &ExperimentConfig, runs_dir: &Path, out: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    let all: Vec<usize> = (0..config.arms.len()).collect();
    let files = expected_files(config, runs_dir, &all)?;
    if config.arms.len() < 2 {
        return Err(Error::Config("compare needs at least two arms".into()));
    }
    let mut arms = Vec::new();
    for (arm, paths) in all.iter().zip(&files) {
        let rows = load_arm(paths, |run| Ok((run.len(), estimate_many(&run, &config.estimators)?)))?;
        arms.push(ArmResults {
            name: config.arms[*arm].name.clone(),
            samples: rows.iter().map(|r| r.0).collect(),
            values: rows.into_iter().map(|r| r.1).collect(),
        });
    }
    let report = config.report(&arms)?;
    write_file(&out.join("report.csv"), &report.to_csv())?;
    write_file(&out.join("report.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Live-point counts of one run on a `ln X` grid, reading the count of the
/// first point at or below each grid value; zero past the end of the run.
pub fn live_points_on_grid(run: &NestedRun, grid: &[f64]) -> Result<Vec<f64>> {
    let w = run.weights()?;
    Ok(grid
        .iter()
        .map(|&g| {
            // log_x is decreasing
            let i = w.log_x.partition_point(|&lx| lx > g);
            w.n_live.get(i).map_or(0.0, |&n| n as f64)
        })
        .collect())
}

/// Trapezoid integral over a uniform grid.
pub fn grid_integral(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| 0.5 * (g[1] - g[0]).abs() * (v[0] + v[1]))
        .sum()
}

/// Mean live-point allocation of an arm with analytic reference curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProfile {
    pub arm: String,
    pub log_x: Vec<f64>,
    /// `runs[r][k]`: live points of run `r` at `log_x[k]`.
    pub runs: Vec<Vec<f64>>,
    pub mean_n: Vec<f64>,
    /// `L(X) X`, scaled to the area under `mean_n`.
    pub posterior_mass: Vec<f64>,
    /// Posterior mass below `X`, scaled to the area under `mean_n`.
    pub mass_remaining: Vec<f64>,
}

impl AllocationProfile {
    pub fn build(model: &ModelSpec, arm: &str, runs: &[NestedRun], points: usize) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::EmptyRun);
        }
        let lo = runs
            .iter()
            .map(|r| r.log_prior_volumes().last().copied().unwrap_or(0.0))
            .fold(0.0, f64::min);
        let points = points.max(2);
        let grid: Vec<f64> = (0..points).map(|k| lo * (1.0 - k as f64 / (points - 1) as f64)).collect();
        let per_run: Vec<Vec<f64>> = runs.iter().map(|r| live_points_on_grid(r, &grid)).collect::<Result<_>>()?;
        let mean_n: Vec<f64> = (0..points).map(|k| per_run.iter().map(|v| v[k]).sum::<f64>() / per_run.len() as f64).collect();
        let area = grid_integral(&grid, &mean_n);
        let prof = model.posterior_mass_profile(grid[0], 0.0, points);
        let scale = |log_vals: &[f64]| -> Vec<f64> {
            let m = log_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let raw: Vec<f64> = log_vals.iter().map(|v| (v - m).exp()).collect();
            let a = grid_integral(&grid, &raw);
            raw.iter().map(|v| v * area / a).collect()
        };
        Ok(Self {
            arm: arm.into(),
            posterior_mass: scale(&prof.log_mass),
            mass_remaining: scale(&prof.log_remaining),
            log_x: grid,
            runs: per_run,
            mean_n,
        })
    }

    /// `ln X` where the mean allocation peaks.
    pub fn peak_log_x(&self) -> f64 {
        let k = self
            .mean_n
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(k, _)| k);
        self.log_x[k]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("log_x,mean_n,posterior_mass,mass_remaining\n");
        for k in 0..self.log_x.len() {
            let _ = writeln!(out, "{:e},{:e},{:e},{:e}", self.log_x[k], self.mean_n[k], self.posterior_mass[k], self.mass_remaining[k]);
        }
        out
    }

    pub fn runs_csv(&self) -> String {
        let mut out = String::from("run,log_x,n_live\n");
        for (r, v) in self.runs.iter().enumerate() {
            for (x, n) in self.log_x.iter().zip(v) {
                let _ = writeln!(out, "{r},{x:e},{n}");
            }
        }
        out
    }
}

pub const PROFILE_GRID_POINTS: usize = 400;

/// Plot data of live points against `ln X` for every arm:
/// `alloc_<arm>.csv` (mean and analytic curves) and `alloc_runs_<arm>.csv`.
pub fn cmd_alloc_profile(config: &ExperimentConfig, runs_dir: &Path, out: &Path) -> Result<Vec<AllocationProfile>> {
    config.validate()?;
    let all: Vec<usize> = (0..config.arms.len()).collect();
    let files = expected_files(config, runs_dir, &all)?;
    let mut profiles = Vec::new();
    for (arm, paths) in all.iter().zip(&files) {
        let runs = load_arm(paths, Ok)?;
        let name = &config.arms[*arm].name;
        let p = AllocationProfile::build(&config.model, name, &runs, PROFILE_GRID_POINTS)?;
        write_file(&out.join(format!("alloc_{name}.csv")), &p.to_csv())?;
        write_file(&out.join(format!("alloc_runs_{name}.csv")), &p.runs_csv())?;
        profiles.push(p);
    }
    Ok(profiles)
}

/// Repeated-run spread against bootstrap error estimates for one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapTable {
    pub arm: String,
    pub estimators: Vec<EstimatorId>,
    /// Rows: `(label, values, uncertainties)`.
    pub rows: Vec<(String, Vec<f64>, Vec<f64>)>,
}

impl BootstrapTable {
    pub fn row(&self, label: &str) -> Option<&[f64]> {
        self.rows.iter().find(|r| r.0 == label).map(|r| r.1.as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for e in &self.estimators {
            let _ = write!(out, ",{0},{0}_unc", e.name());
        }
        out.push('\n');
        for (label, v, u) in &self.rows {
            out.push_str(label);
            for (v, u) in v.iter().zip(u) {
                let _ = write!(out, ",{v:e},{u:e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Per-run results feeding a [`BootstrapTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapRun {
    pub estimates: Vec<f64>,
    pub boot_std: Vec<f64>,
    pub boot_upper: Vec<f64>,
}

/// Estimates and bootstrap errors of one run; the bootstrap stream is
/// derived from the run's own stream so results are order independent.
pub fn bootstrap_run(run: &NestedRun, ids: &[EstimatorId], settings: &BootstrapSettings, seed: u64, stream: u64) -> Result<BootstrapRun> {
    let mut rng = stream_rng(seed ^ 0x9e37_79b9_7f4a_7c15, stream);
    let errs = bootstrap_errors(run, ids, settings, &mut rng)?;
    Ok(BootstrapRun {
        estimates: estimate_many(run, ids)?,
        boot_std: errs.iter().map(|e| e.std).collect(),
        boot_upper: errs.iter().map(|e| e.credible_upper).collect(),
    })
}

/// Table rows: mean result, repeated-run St.Dev., bootstrap/repeats St.Dev.
/// ratio, bootstrap St.Dev. variation (%), mean bootstrap credible bound,
/// and empirical coverage (%) of mean ± 1 bootstrap St.Dev. and of the
/// credible bound. Coverage is measured against the analytic value when
/// known, else against the mean over runs.
pub fn bootstrap_table(model: &ModelSpec, arm: &str, ids: &[EstimatorId], runs: &[BootstrapRun]) -> Result<BootstrapTable> {
    if runs.len() < 2 {
        return Err(Error::Config("the bootstrap table needs at least 2 runs".into()));
    }
    let n = runs.len() as f64;
    let se = |v: &[f64]| std_dev(v) / n.sqrt();
    let mut rows: Vec<(String, Vec<f64>, Vec<f64>)> = [
        "mean",
        "repeats_std",
        "bootstrap_ratio",
        "bootstrap_variation_pct",
        "bootstrap_credible_upper",
        "coverage_1sigma_pct",
        "coverage_credible_pct",
    ]
    .iter()
    .map(|l| (l.to_string(), Vec::new(), Vec::new()))
    .collect();
    for (k, &id) in ids.iter().enumerate() {
        let est: Vec<f64> = runs.iter().map(|r| r.estimates[k]).collect();
        let bstd: Vec<f64> = runs.iter().map(|r| r.boot_std[k]).collect();
        let bup: Vec<f64> = runs.iter().map(|r| r.boot_upper[k]).collect();
        let repeats = std_dev(&est);
        let truth = analytic_value(model, id).unwrap_or_else(|| mean(&est));
        let frac = |hits: usize| 100.0 * hits as f64 / n;
        let cover1 = runs.iter().filter(|r| (r.estimates[k] - truth).abs() <= r.boot_std[k]).count();
        let cover_ci = runs.iter().filter(|r| truth <= r.boot_upper[k]).count();
        let binom = |p: f64| 100.0 * (p / 100.0 * (1.0 - p / 100.0) / n).sqrt();
        let cells = [
            (mean(&est), se(&est)),
            (repeats, crate::analysis::gain::std_dev_uncertainty(&est)),
            (mean(&bstd) / repeats, se(&bstd) / repeats),
            (100.0 * std_dev(&bstd) / mean(&bstd), 0.0),
            (mean(&bup), se(&bup)),
            (frac(cover1), binom(frac(cover1))),
            (frac(cover_ci), binom(frac(cover_ci))),
        ];
        for (row, (v, u)) in rows.iter_mut().zip(cells) {
            row.1.push(v);
            row.2.push(u);
        }
    }
    Ok(BootstrapTable {
        arm: arm.into(),
        estimators: ids.to_vec(),
        rows,
    })
}

impl ExperimentConfig {
    pub fn bootstrap_arm_index(&self) -> Result<usize> {
        match &self.bootstrap_arm {
            Some(name) => self.arm_index(name),
            None => self
                .arms
                .iter()
                .position(|a| a.method != Method::Standard)
                .or(if self.arms.is_empty() { None } else { Some(0) })
                .ok_or_else(|| Error::Config("no arm to bootstrap".into())),
        }
    }
}

/// Bootstrap error table for the configured arm from its run files; writes
/// `bootstrap_table.csv`.
pub fn cmd_bootstrap_table(config: &ExperimentConfig, runs_dir: &Path, out: &Path) -> Result<BootstrapTable> {
    config.validate()?;
    let arm = config.bootstrap_arm_index()?;
    let files = expected_files(config, runs_dir, &[arm])?.remove(0);
    if files.len() < 2 {
        return Err(Error::Config("the bootstrap table needs at least 2 runs".into()));
    }
    let separate = config.bootstrap.separate_initial && config.arms[arm].method != Method::Standard;
    let settings = BootstrapSettings {
        separate_initial: separate,
        ..config.bootstrap
    };
    let per_run: Vec<BootstrapRun> = files
        .par_iter()
        .enumerate()
        .map(|(r, p)| {
            let run = load_run(p)?.0;
            bootstrap_run(&run, &config.estimators, &settings, config.seed, config.run_stream(arm, r))
        })
        .collect::<Result<_>>()?;
    let table = bootstrap_table(&config.model, &config.arms[arm].name, &config.estimators, &per_run)?;
    write_file(&out.join("bootstrap_table.csv"), &table.to_csv())?;
    Ok(table)
}
