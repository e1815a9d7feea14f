//! Table-style experiments: every (size, seed, p, method) combination on a
//! freshly generated instance, started from the lasso solution.
//!
//! CSV columns, in order:
//! `m, n, p, method, objective, residual, outer, inner, time_s, seed, t, status, error`.
//! `time_s` is solver wall time and excludes instance generation and the
//! warm start. The JSON file holds the same rows as an array of objects.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use lpirl_core::solvers::{solve, solve_lasso_warmstart, SolverConfig, SolverRun, Status};
use lpirl_core::{DVector, LeastSquares, LpProblem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentSpec;
use crate::instance::{default_t, generate_orthonormal_instance, generate_uniform_instance, Instance, InstanceKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub method: String,
    pub objective: f64,
    pub residual: f64,
    pub outer: usize,
    pub inner: usize,
    pub time_s: f64,
    pub seed: u64,
    pub t: usize,
    pub status: String,
    pub error: String,
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIterations => "max-iterations",
        Status::Error => "error",
    }
}

pub fn make_instance(spec: &ExperimentSpec, m: usize, n: usize, seed: u64) -> Result<Instance> {
    let inst = match spec.kind {
        InstanceKind::OrthonormalRows => {
            let t = spec.t.unwrap_or_else(|| default_t(m));
            generate_orthonormal_instance(m, n, t, spec.sigma, seed)?
        }
        InstanceKind::Uniform => generate_uniform_instance(m, n, seed)?,
    };
    Ok(inst)
}

/// Lasso warm start `x0` for `(A, b, lambda)` to optimality residual `tol`.
pub fn warm_start(ls: &LeastSquares, lambda: f64, tol: f64) -> Result<DVector<f64>> {
    solve_lasso_warmstart(ls, lambda, tol).context("lasso warm start failed")
}

/// Runs one configured solver, timing only the solve itself.
pub fn timed_solve(prob: &LpProblem<LeastSquares>, cfg: &SolverConfig, x0: &DVector<f64>) -> (lpirl_core::Result<SolverRun>, f64) {
    let start = Instant::now();
    let run = solve(prob, cfg, x0);
    (run, start.elapsed().as_secs_f64())
}

struct Task {
    m: usize,
    n: usize,
    seed: u64,
}

fn run_task(spec: &ExperimentSpec, task: &Task) -> Result<Vec<ResultRow>> {
    let inst = make_instance(spec, task.m, task.n, task.seed)?;
    let ls = LeastSquares::new(inst.a.clone(), inst.b.clone())?;
    let x0 = warm_start(&ls, spec.lambda, spec.warm_start_tol)?;
    let mut rows = Vec::new();
    for &p in &spec.p_values {
        let prob = LpProblem::new(ls.clone(), spec.lambda, p)?;
        for cfg in &spec.methods {
            let (run, time_s) = timed_solve(&prob, cfg, &x0);
            let base = ResultRow {
                m: task.m,
                n: task.n,
                p,
                method: cfg.method.to_string(),
                objective: f64::NAN,
                residual: f64::NAN,
                outer: 0,
                inner: 0,
                time_s,
                seed: task.seed,
                t: inst.t,
                status: "error".into(),
                error: String::new(),
            };
            rows.push(match run {
                Ok(r) => ResultRow {
                    objective: r.final_objective().unwrap_or(f64::NAN),
                    residual: r.final_residual().unwrap_or(f64::NAN),
                    outer: r.outer_iterations(),
                    inner: r.total_inner(),
                    status: status_name(r.status).into(),
                    error: r.message.unwrap_or_default(),
                    ..base
                },
                Err(e) => ResultRow { error: e.to_string(), ..base },
            });
        }
    }
    Ok(rows)
}

/// Runs the full grid. Per-row solver failures are recorded in the row; only
/// instance generation or warm-start failures abort the experiment.
///
/// Rows are ordered by size, seed, p and method as listed in the spec, in
/// both serial and parallel mode.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut tasks = Vec::new();
    for &(m, n) in &spec.sizes {
        for &seed in &spec.seeds {
            tasks.push(Task { m, n, seed });
        }
    }
    let chunks: Vec<Vec<ResultRow>> = if spec.parallel {
        tasks.par_iter().map(|t| run_task(spec, t)).collect::<Result<_>>()?
    } else {
        tasks.iter().map(|t| run_task(spec, t)).collect::<Result<_>>()?
    };
    Ok(chunks.into_iter().flatten().collect())
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(rows: &[ResultRow], path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(rows)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes `results.csv` and `results.json` under `dir`, returning both paths.
pub fn write_tables(rows: &[ResultRow], dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (csv_path, json_path) = (dir.join("results.csv"), dir.join("results.json"));
    write_csv(rows, &csv_path)?;
    write_json(rows, &json_path)?;
    Ok((csv_path, json_path))
}
