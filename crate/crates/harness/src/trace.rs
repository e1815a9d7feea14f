//! Per-run trace files: a [`SolverRun`] as JSON, holding per-iteration
//! summaries and the first and last iterates.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use lpirl_core::solvers::{verify_run, InvariantCheck, SolverRun};

pub fn write_trace(run: &SolverRun, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(run)?;
    fs::write(path, text).with_context(|| format!("writing trace {}", path.display()))
}

pub fn read_trace(path: &Path) -> Result<SolverRun> {
    let text = fs::read_to_string(path).with_context(|| format!("reading trace {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing trace {}", path.display()))
}

/// Loads a trace and replays the solver invariants on it.
pub fn check_trace(path: &Path) -> Result<Vec<InvariantCheck>> {
    Ok(verify_run(&read_trace(path)?))
}
