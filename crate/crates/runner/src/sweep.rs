//! Parameter sweeps across the `α + β = 2` threshold.

use std::path::Path;

use emhd_core::emhd::{EmhdParams, ParamMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Result, RunnerError};
use crate::output;
use crate::run::run;

/// One `(α, β, seed)` point. Optional columns are empty when the run failed
/// or, for `c_hat`/`t0`/`bound_satisfied`, when it ran in exploration mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    /// `α + β <= 2`: no theorem parameters, no Gronwall fit.
    pub exploration: bool,
    /// Largest `E_s(t)/E_s(0)` over the horizon.
    pub max_growth: Option<f64>,
    pub c_hat: Option<f64>,
    pub t0: Option<f64>,
    pub bound_satisfied: Option<bool>,
    pub termination: String,
    pub error: Option<String>,
}

/// Header row followed by one row per point; missing values are empty.
pub fn summary_csv(rows: &[SweepRow]) -> Result<String> {
    output::to_csv(rows)
}

pub fn run_dir_name(index: usize, alpha: f64, beta: f64, seed: u64) -> String {
    format!("run_{index:03}_a{alpha}_b{beta}_s{seed}")
}

/// Row configuration; points at or below the threshold switch to
/// exploration mode.
pub fn point_config(
    base: &RunConfig,
    root: &Path,
    index: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
) -> RunConfig {
    let mut cfg = base.clone();
    cfg.params = EmhdParams {
        alpha,
        beta,
        mode: if alpha + beta > 2.0 {
            ParamMode::Theorem
        } else {
            ParamMode::Exploration
        },
        ..base.params
    };
    cfg.seed = seed;
    cfg.output_dir = root.join(run_dir_name(index, alpha, beta, seed));
    cfg
}

fn run_point(cfg: &RunConfig, index: usize) -> SweepRow {
    let mut row = SweepRow {
        index,
        alpha: cfg.params.alpha,
        beta: cfg.params.beta,
        seed: cfg.seed,
        exploration: cfg.params.alpha + cfg.params.beta <= 2.0,
        max_growth: None,
        c_hat: None,
        t0: None,
        bound_satisfied: None,
        termination: "error".into(),
        error: None,
    };
    match run(cfg) {
        Ok(out) => {
            let sim = &out.simulation;
            row.max_growth = sim.series.max_growth();
            row.c_hat = sim.fit.map(|f| f.c_hat);
            row.t0 = sim.fit.map(|f| f.t0);
            row.bound_satisfied = sim.fit.map(|f| f.bound_satisfied);
            row.termination = sim.termination.label().into();
        }
        Err(e) => {
            log::warn!("sweep point {index} failed: {e}");
            row.error = Some(e.to_string());
        }
    }
    row
}

/// Runs every `(α, β, seed)` combination of the lists over the base
/// horizon on `workers` threads (0 picks the default), each in its own
/// directory under `base.output_dir`, and writes `summary.csv` there.
/// Failed points are recorded in their row.
pub fn sweep(
    base: &RunConfig,
    alphas: &[f64],
    betas: &[f64],
    seeds: &[u64],
    workers: usize,
) -> Result<Vec<SweepRow>> {
    if alphas.is_empty() || betas.is_empty() || seeds.is_empty() {
        return Err(RunnerError::Config("sweep lists must be nonempty".into()));
    }
    let root = base.output_dir.clone();
    std::fs::create_dir_all(&root).map_err(|e| RunnerError::io(&root, e))?;
    let mut points = Vec::new();
    for &alpha in alphas {
        for &beta in betas {
            for &seed in seeds {
                let index = points.len();
                points.push(point_config(base, &root, index, alpha, beta, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunnerError::Config(format!("worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, cfg)| run_point(cfg, i))
            .collect()
    });
    output::write_file(&root.join("summary.csv"), summary_csv(&rows)?)?;
    Ok(rows)
}
