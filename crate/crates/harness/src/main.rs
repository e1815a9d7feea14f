use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lpirl_core::solvers::{Method, SolverConfig, Status};
use lpirl_core::subproblems::Alpha;
use lpirl_core::{LeastSquares, LpProblem};
use lpirl_harness::experiment::{run_experiment, timed_solve, warm_start, write_tables};
use lpirl_harness::instance::{default_t, generate_orthonormal_instance, generate_uniform_instance, load_instance, serialize_instance};
use lpirl_harness::trace::{check_trace, write_trace};
use lpirl_harness::parse_spec;

#[derive(Parser)]
#[command(name = "lpirl", version, about = "Iterative reweighted l1/l2 solvers for lp-regularized least squares")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Orthonormal,
    Uniform,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance and write it in the binary instance format.
    Generate {
        #[arg(long, value_enum, default_value = "orthonormal")]
        kind: Kind,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Nonzeros in the planted signal (default round(m/5)).
        #[arg(long = "T")]
        t: Option<usize>,
        #[arg(long, default_value_t = 0.005)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance from its lasso warm start.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// type1-exact, type1-prox, type2-exact, type2-prox, new-irl1-exact, new-irl1-prox
        #[arg(long, default_value = "new-irl1-prox")]
        method: Method,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 3e-3)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long)]
        max_outer: Option<usize>,
        /// 1 or 2; ignored by the new-irl1 methods.
        #[arg(long, default_value_t = 1)]
        alpha: u32,
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Run a grid of solves described by a key = value spec file.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the spec's `output` key.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Replay the solver invariants on a trace file.
    Check { trace: PathBuf },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Generate { kind, m, n, t, sigma, seed, out } => {
            let inst = match kind {
                Kind::Orthonormal => generate_orthonormal_instance(m, n, t.unwrap_or_else(|| default_t(m)), sigma, seed)?,
                Kind::Uniform => generate_uniform_instance(m, n, seed)?,
            };
            serialize_instance(&inst, &out).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {}x{} {:?} instance (T = {}, seed {}) to {}", m, n, inst.kind, inst.t, seed, out.display());
            Ok(true)
        }
        Cmd::Solve {
            instance,
            method,
            p,
            lambda,
            tol,
            max_outer,
            alpha,
            trace_out,
        } => {
            let inst = load_instance(&instance).with_context(|| format!("loading {}", instance.display()))?;
            let ls = LeastSquares::new(inst.a, inst.b)?;
            let prob = LpProblem::new(ls, lambda, p)?;
            let mut cfg = SolverConfig::new(method).with_tol(tol).with_alpha(Alpha::from_int(alpha)?);
            if let Some(k) = max_outer {
                cfg = cfg.with_max_outer(k);
            }
            let x0 = warm_start(prob.objective(), lambda, 1e-6)?;
            let (run, secs) = timed_solve(&prob, &cfg, &x0);
            let run = run?;
            println!(
                "{} status={:?} objective={:.6} residual={:.3e} outer={} inner={} time={:.3}s",
                method,
                run.status,
                run.final_objective().unwrap_or(f64::NAN),
                run.final_residual().unwrap_or(f64::NAN),
                run.outer_iterations(),
                run.total_inner(),
                secs
            );
            if let Some(msg) = &run.message {
                println!("note: {msg}");
            }
            if let Some(path) = trace_out {
                write_trace(&run, &path)?;
            }
            Ok(run.status == Status::Converged)
        }
        Cmd::Experiment { spec, out_dir } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec = parse_spec(&text)?;
            let rows = run_experiment(&spec)?;
            let dir = out_dir.unwrap_or_else(|| spec.output_path.clone());
            let (csv, json) = write_tables(&rows, &dir)?;
            println!("{:>5} {:>5} {:>4} {:>15} {:>10} {:>9} {:>6} {:>7} {:>8}", "m", "n", "p", "method", "objective", "residual", "outer", "inner", "time_s");
            for r in &rows {
                println!(
                    "{:>5} {:>5} {:>4} {:>15} {:>10.6} {:>9.2e} {:>6} {:>7} {:>8.3}",
                    r.m, r.n, r.p, r.method, r.objective, r.residual, r.outer, r.inner, r.time_s
                );
            }
            println!("wrote {} and {}", csv.display(), json.display());
            Ok(true)
        }
        Cmd::Check { trace } => {
            let checks = check_trace(&trace)?;
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if checks.is_empty() {
                bail!("no invariants applied");
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
