//! Flat `key = value` experiment files.
//!
//! ```text
//! # Table 1 at desk scale
//! sizes   = 120x512, 240x1024
//! p       = 0.1
//! lambda  = 3e-3
//! methods = type1-prox, type2-prox, new-irl1-prox
//! seeds   = 1, 2, 3
//! output  = results/table1
//! ```
//!
//! Optional keys: `kind` (orthonormal | uniform, default orthonormal),
//! `sigma` (0.005), `T` (round(m/5) per size), `tol` (1e-4), `alpha` (1),
//! `max_outer` (per-method default), `warm_start_tol` (1e-6), `parallel`
//! (false). Lists are comma separated; `#` starts a comment.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lpirl_core::solvers::{Method, SolverConfig};
use lpirl_core::subproblems::Alpha;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::InstanceKind;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: key '{key}' given twice")]
    Duplicate { line: usize, key: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("bad value for '{key}': {msg}")]
    Value { key: String, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// `(m, n)` pairs with `m < n` for orthonormal instances.
    pub sizes: Vec<(usize, usize)>,
    pub p_values: Vec<f64>,
    pub lambda: f64,
    pub methods: Vec<SolverConfig>,
    pub seeds: Vec<u64>,
    pub output_path: PathBuf,
    pub kind: InstanceKind,
    pub sigma: f64,
    /// Planted sparsity; `None` means round(m/5).
    pub t: Option<usize>,
    pub warm_start_tol: f64,
    pub parallel: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, msg: String| ConfigError::Value { key: key.into(), msg };
        if self.sizes.is_empty() {
            return Err(bad("sizes", "empty list".into()));
        }
        for &(m, n) in &self.sizes {
            if m == 0 || n == 0 {
                return Err(bad("sizes", format!("{m}x{n} has a zero dimension")));
            }
            if self.kind == InstanceKind::OrthonormalRows && m >= n {
                return Err(bad("sizes", format!("{m}x{n} needs m < n")));
            }
        }
        if self.p_values.is_empty() || self.p_values.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(bad("p", format!("values must lie in (0, 1), got {:?}", self.p_values)));
        }
        if !(self.lambda > 0.0) {
            return Err(bad("lambda", format!("must be positive, got {}", self.lambda)));
        }
        if self.methods.is_empty() {
            return Err(bad("methods", "empty list".into()));
        }
        if self.seeds.is_empty() {
            return Err(bad("seeds", "empty list".into()));
        }
        if !(self.warm_start_tol > 0.0) {
            return Err(bad("warm_start_tol", "must be positive".into()));
        }
        for c in &self.methods {
            c.validate().map_err(|e| bad("methods", e.to_string()))?;
        }
        Ok(())
    }
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_all<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    list(v)
        .map(|s| {
            s.parse::<T>().map_err(|e| ConfigError::Value {
                key: key.into(),
                msg: format!("'{s}': {e}"),
            })
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| ConfigError::Value {
        key: key.into(),
        msg: format!("'{v}': {e}"),
    })
}

fn parse_size(s: &str) -> Result<(usize, usize), ConfigError> {
    let bad = || ConfigError::Value {
        key: "sizes".into(),
        msg: format!("'{s}' is not of the form MxN"),
    };
    let (m, n) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
}

const KEYS: &[&str] = &[
    "sizes", "p", "lambda", "methods", "seeds", "output", "kind", "sigma", "t", "tol", "alpha", "max_outer", "warm_start_tol", "parallel",
];

pub fn parse_spec(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let mut kv = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let key = k.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        if kv.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Duplicate { line: i + 1, key });
        }
    }
    let req = |k: &'static str| kv.get(k).map(String::as_str).ok_or(ConfigError::Missing(k));

    let sizes = list(req("sizes")?).map(parse_size).collect::<Result<Vec<_>, _>>()?;
    let p_values = parse_all::<f64>("p", req("p")?)?;
    let lambda = parse_one::<f64>("lambda", req("lambda")?)?;
    let seeds = parse_all::<u64>("seeds", req("seeds")?)?;
    let output_path = PathBuf::from(req("output")?);
    let kind = match kv.get("kind") {
        Some(v) => parse_one::<InstanceKind>("kind", v)?,
        None => InstanceKind::OrthonormalRows,
    };
    let sigma = kv.get("sigma").map(|v| parse_one::<f64>("sigma", v)).transpose()?.unwrap_or(0.005);
    let t = kv.get("t").map(|v| parse_one::<usize>("T", v)).transpose()?;
    let tol = kv.get("tol").map(|v| parse_one::<f64>("tol", v)).transpose()?;
    let alpha = match kv.get("alpha") {
        Some(v) => {
            let a = parse_one::<u32>("alpha", v)?;
            Alpha::from_int(a).map_err(|e| ConfigError::Value {
                key: "alpha".into(),
                msg: e.to_string(),
            })?
        }
        None => Alpha::One,
    };
    let max_outer = kv.get("max_outer").map(|v| parse_one::<usize>("max_outer", v)).transpose()?;
    let warm_start_tol = kv
        .get("warm_start_tol")
        .map(|v| parse_one::<f64>("warm_start_tol", v))
        .transpose()?
        .unwrap_or(1e-6);
    let parallel = kv.get("parallel").map(|v| parse_one::<bool>("parallel", v)).transpose()?.unwrap_or(false);

    let methods = parse_all::<Method>("methods", req("methods")?)?
        .into_iter()
        .map(|m| {
            let mut c = SolverConfig::new(m).with_alpha(alpha);
            if let Some(tol) = tol {
                c = c.with_tol(tol);
            }
            if let Some(k) = max_outer {
                c = c.with_max_outer(k);
            }
            c
        })
        .collect();

    let spec = ExperimentSpec {
        sizes,
        p_values,
        lambda,
        methods,
        seeds,
        output_path,
        kind,
        sigma,
        t,
        warm_start_tol,
        parallel,
    };
    spec.validate()?;
    Ok(spec)
}
