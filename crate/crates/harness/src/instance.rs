//! Random test instances and their on-disk format.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! magic    8 bytes  "LPIRLINS"
//! version  u32      1
//! kind     u8       0 = orthonormal rows, 1 = uniform
//! seed     u64
//! m, n, t  u64 x 3
//! sigma    f64
//! A        m*n f64, row-major
//! b        m f64
//! len      u64      length of planted_x (n or 0)
//! x~       len f64
//! ```

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"LPIRLINS";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid instance parameters: {0}")]
    Parameters(String),
    #[error("not an instance file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported instance format version {found}, expected {FORMAT_VERSION}")]
    Version { found: u32 },
    #[error("unknown instance kind tag {0}")]
    Kind(u8),
    #[error("instance file truncated while reading {what}")]
    Truncated { what: &'static str },
    #[error("instance file has {0} trailing bytes")]
    Trailing(usize),
    #[error("instance header is inconsistent: {0}")]
    Header(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstanceKind {
    OrthonormalRows,
    Uniform,
}

impl InstanceKind {
    fn tag(self) -> u8 {
        match self {
            InstanceKind::OrthonormalRows => 0,
            InstanceKind::Uniform => 1,
        }
    }

    fn from_tag(t: u8) -> Result<Self, InstanceError> {
        match t {
            0 => Ok(InstanceKind::OrthonormalRows),
            1 => Ok(InstanceKind::Uniform),
            other => Err(InstanceError::Kind(other)),
        }
    }
}

impl std::str::FromStr for InstanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "orthonormal" | "orthonormal-rows" | "orthonormalrows" => Ok(InstanceKind::OrthonormalRows),
            "uniform" => Ok(InstanceKind::Uniform),
            other => Err(format!("unknown instance kind '{other}' (expected orthonormal or uniform)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Empty for uniform instances.
    pub planted_x: DVector<f64>,
    pub t: usize,
    pub sigma: f64,
    pub seed: u64,
    pub kind: InstanceKind,
}

impl Instance {
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }
}

/// `T = round(m / 5)`, the default sparsity of the planted signal.
pub fn default_t(m: usize) -> usize {
    ((m as f64) / 5.0).round() as usize
}

/// `A = B^T` for an orthonormal basis `B` of `range(W)`, `W` an `n x m`
/// standard normal matrix; `b = A x~ + sigma v` with a `T`-sparse `+-1`
/// planted `x~` and standard normal `v`.
pub fn generate_orthonormal_instance(m: usize, n: usize, t: usize, sigma: f64, seed: u64) -> Result<Instance, InstanceError> {
    if m == 0 || m >= n {
        return Err(InstanceError::Parameters(format!("need 0 < m < n, got m = {m}, n = {n}")));
    }
    if t == 0 || t > n {
        return Err(InstanceError::Parameters(format!("need 0 < T <= n, got T = {t}, n = {n}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(InstanceError::Parameters(format!("sigma must be finite and nonnegative, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // nalgebra fills column-major, so each column of W is a run of draws
    let w = DMatrix::<f64>::from_fn(n, m, |_, _| rng.sample(StandardNormal));
    let q = w.qr().q();
    let a = q.transpose();

    let mut planted = DVector::zeros(n);
    for i in index::sample(&mut rng, n, t).into_iter() {
        planted[i] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    let v = DVector::<f64>::from_fn(m, |_, _| rng.sample(StandardNormal));
    let b = &a * &planted + v * sigma;
    Ok(Instance {
        a,
        b,
        planted_x: planted,
        t,
        sigma,
        seed,
        kind: InstanceKind::OrthonormalRows,
    })
}

/// `A` and `b` with i.i.d. entries uniform on `[0, 1]`.
pub fn generate_uniform_instance(m: usize, n: usize, seed: u64) -> Result<Instance, InstanceError> {
    if m == 0 || n == 0 {
        return Err(InstanceError::Parameters(format!("need m, n >= 1, got m = {m}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new_inclusive(0.0, 1.0);
    let a = DMatrix::<f64>::from_fn(m, n, |_, _| rng.sample(unit));
    let b = DVector::<f64>::from_fn(m, |_, _| rng.sample(unit));
    Ok(Instance {
        a,
        b,
        planted_x: DVector::zeros(0),
        t: 0,
        sigma: 0.0,
        seed,
        kind: InstanceKind::Uniform,
    })
}

pub fn write_instance<W: Write>(inst: &Instance, mut w: W) -> io::Result<()> {
    let (m, n) = (inst.m(), inst.n());
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&[inst.kind.tag()])?;
    w.write_all(&inst.seed.to_le_bytes())?;
    for v in [m, n, inst.t] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    w.write_all(&inst.sigma.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * (m * n + m + n + 1));
    for i in 0..m {
        for j in 0..n {
            buf.extend_from_slice(&inst.a[(i, j)].to_le_bytes());
        }
    }
    for v in inst.b.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&(inst.planted_x.len() as u64).to_le_bytes());
    for v in inst.planted_x.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize, what: &'static str) -> Result<&'a [u8], InstanceError> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.data.len());
        let end = end.ok_or(InstanceError::Truncated { what })?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, InstanceError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &'static str) -> Result<f64, InstanceError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn count(&mut self, what: &'static str) -> Result<usize, InstanceError> {
        let v = self.u64(what)?;
        usize::try_from(v).map_err(|_| InstanceError::Header(format!("{what} = {v} does not fit in memory")))
    }

    fn f64s(&mut self, len: usize, what: &'static str) -> Result<Vec<f64>, InstanceError> {
        let bytes = len.checked_mul(8).ok_or(InstanceError::Header(format!("{what} length overflows")))?;
        let raw = self.take(bytes, what)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn decode_instance(data: &[u8]) -> Result<Instance, InstanceError> {
    let mut c = Cursor { data, pos: 0 };
    if c.take(8, "magic").map_err(|_| InstanceError::BadMagic)? != MAGIC {
        return Err(InstanceError::BadMagic);
    }
    let version = u32::from_le_bytes(c.take(4, "version")?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(InstanceError::Version { found: version });
    }
    let kind = InstanceKind::from_tag(c.take(1, "kind")?[0])?;
    let seed = c.u64("seed")?;
    let m = c.count("m")?;
    let n = c.count("n")?;
    let t = c.count("T")?;
    let sigma = c.f64("sigma")?;
    let a_len = m.checked_mul(n).ok_or(InstanceError::Header(format!("m*n overflows ({m} x {n})")))?;
    let a = c.f64s(a_len, "A")?;
    let b = c.f64s(m, "b")?;
    let len = c.count("planted_x length")?;
    if len != 0 && len != n {
        return Err(InstanceError::Header(format!("planted_x has length {len}, expected 0 or n = {n}")));
    }
    let x = c.f64s(len, "planted_x")?;
    if c.pos != data.len() {
        return Err(InstanceError::Trailing(data.len() - c.pos));
    }
    Ok(Instance {
        a: DMatrix::from_row_slice(m, n, &a),
        b: DVector::from_vec(b),
        planted_x: DVector::from_vec(x),
        t,
        sigma,
        seed,
        kind,
    })
}

pub fn read_instance<R: Read>(mut r: R) -> Result<Instance, InstanceError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    decode_instance(&data)
}

pub fn serialize_instance(inst: &Instance, path: &Path) -> Result<(), InstanceError> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    write_instance(inst, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<Instance, InstanceError> {
    decode_instance(&fs::read(path)?)
}
