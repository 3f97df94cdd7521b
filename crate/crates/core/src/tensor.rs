//! Random tensors, their flattenings `M_sigma`, the permutation operators `U_eta`,
//! the normalized trace `Phi_N` and the conditional expectation onto `span{U_eta}`.
//!
//! Index conventions (all 0-based internally):
//! * multi-indices are row-major, `encode(i) = sum_j i_j N^{k-1-j}`;
//! * `M_sigma(y) = t(y_{sigma(1)}, .., y_{sigma(2k)})` where `y = (row ‖ col)`;
//! * `U_eta(i, j) = 1` iff `j_s = i_{eta(s)}` for every `s`.
//!
//! With these, `U_eta M_sigma U_eta'^* = M_{(eta ⊔ eta') sigma}`, `M_{tau sigma} = M_sigma^T`
//! and `eta -> U_eta` is a representation.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_algebra::GroupAlgebraElement;
use crate::perm::{enumerate_group, factorial, Permutation};
use crate::scalar::Real;
use crate::word::{Eps, Word};

/// Largest tensor (in entries) the sampler will allocate.
pub const MAX_TENSOR_ENTRIES: usize = 1 << 26;
/// Largest Choi matrix side accepted by [`choi_check`].
pub const MAX_CHOI_SIDE: usize = 4096;
/// Largest tensor written by the CSV exporters.
pub const MAX_CSV_ENTRIES: usize = 1 << 16;

/// Law `mu` of the non-zero part of a diluted entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseLaw {
    /// `(X + iY)/sqrt 2`, `E|y|^2 = 1`, `E y^2 = 0`.
    ComplexGaussian,
    RealGaussian,
    /// Uniform on `{-1, +1}`.
    Rademacher,
    PointMass {
        re: f64,
        im: f64,
    },
}

impl BaseLaw {
    /// `E[y^a conj(y)^b]`.
    pub fn moment(&self, a: usize, b: usize) -> Complex64 {
        match *self {
            BaseLaw::ComplexGaussian => {
                if a == b {
                    Complex64::new(factorial(a) as f64, 0.0)
                } else {
                    Complex64::zero()
                }
            }
            BaseLaw::RealGaussian => Complex64::new(double_factorial_even_moment(a + b), 0.0),
            BaseLaw::Rademacher => Complex64::new(if (a + b).is_multiple_of(2) { 1.0 } else { 0.0 }, 0.0),
            BaseLaw::PointMass { re, im } => {
                let z = Complex64::new(re, im);
                z.powu(a as u32) * z.conj().powu(b as u32)
            }
        }
    }

    pub fn mean(&self) -> Complex64 {
        self.moment(1, 0)
    }

    pub fn second_absolute(&self) -> f64 {
        self.moment(1, 1).re
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match *self {
            BaseLaw::ComplexGaussian => {
                let (x, y): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
            }
            BaseLaw::RealGaussian => Complex64::new(rng.sample(StandardNormal), 0.0),
            BaseLaw::Rademacher => Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
            BaseLaw::PointMass { re, im } => Complex64::new(re, im),
        }
    }
}

/// `E[g^m]` for a standard real Gaussian: `(m-1)!!` for even `m`, else 0.
fn double_factorial_even_moment(m: usize) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    (1..m).step_by(2).map(|v| v as f64).product()
}

/// Entry law of the tensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TensorModel {
    ComplexGinibre,
    RealGinibre,
    /// Entry `(B y - alpha p)/s_N` with `B ~ Bernoulli(p)`, `y ~ base`.
    Diluted {
        p: f64,
        base: BaseLaw,
    },
}

impl TensorModel {
    pub fn validate(&self) -> Result<()> {
        if let TensorModel::Diluted { p, base } = *self {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidModel(format!("dilution probability {p} not in (0, 1]")));
            }
            let (alpha, beta2) = (base.mean(), base.second_absolute());
            if beta2 - alpha.norm_sqr() * p <= 0.0 {
                return Err(Error::InvalidModel(format!(
                    "degenerate variance: E|y|^2 = {beta2}, |E y|^2 p = {}",
                    alpha.norm_sqr() * p
                )));
            }
        }
        Ok(())
    }

    /// Limits `(c, c')` of `N^k E|m|^2` and `N^k E m^2`.
    pub fn parameter(&self) -> (f64, Complex64) {
        match *self {
            TensorModel::ComplexGinibre => (1.0, Complex64::zero()),
            TensorModel::RealGinibre => (1.0, Complex64::one()),
            TensorModel::Diluted { base, .. } => (base.second_absolute(), base.moment(2, 0)),
        }
    }

    /// Whether every entry has mean zero (true for all supported models).
    pub fn is_centered(&self) -> bool {
        true
    }

    fn dilution_scale(&self, n: usize, k: usize) -> f64 {
        match *self {
            TensorModel::Diluted { p, base } => {
                let (alpha, beta2) = (base.mean(), base.second_absolute());
                ((n as f64).powi(k as i32) * p * (beta2 - alpha.norm_sqr() * p)).sqrt() / beta2.sqrt()
            }
            _ => (n as f64).powf(k as f64 / 2.0),
        }
    }

    /// Exact `E[x^m conj(x)^n]` for one tensor entry `x` at size `(N, k)`.
    pub fn entry_moment(&self, m: usize, n: usize, big_n: usize, k: usize) -> Complex64 {
        let nk = (big_n as f64).powi(k as i32);
        match *self {
            TensorModel::ComplexGinibre => {
                if m == n {
                    Complex64::new(factorial(m) as f64 / nk.powi(m as i32), 0.0)
                } else {
                    Complex64::zero()
                }
            }
            TensorModel::RealGinibre => {
                Complex64::new(double_factorial_even_moment(m + n) / nk.powf((m + n) as f64 / 2.0), 0.0)
            }
            TensorModel::Diluted { p, base } => {
                let shift = base.mean() * p;
                let raw = |a: usize, b: usize| if a + b == 0 { Complex64::one() } else { base.moment(a, b) * p };
                let mut acc = Complex64::zero();
                for a in 0..=m {
                    for b in 0..=n {
                        let binom = (binomial(m, a) * binomial(n, b)) as f64;
                        acc += raw(a, b) * (-shift).powu((m - a) as u32) * (-shift.conj()).powu((n - b) as u32) * binom;
                    }
                }
                acc / self.dilution_scale(big_n, k).powi((m + n) as i32)
            }
        }
    }

    fn sample_entry<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Complex64 {
        match *self {
            TensorModel::ComplexGinibre => BaseLaw::ComplexGaussian.sample(rng) / scale,
            TensorModel::RealGinibre => BaseLaw::RealGaussian.sample(rng) / scale,
            TensorModel::Diluted { p, base } => {
                let x = if rng.random::<f64>() < p { base.sample(rng) } else { Complex64::zero() };
                (x - base.mean() * p) / scale
            }
        }
    }
}

fn binomial(n: usize, r: usize) -> u64 {
    (0..r as u64).fold(1u64, |acc, i| acc * (n as u64 - i) / (i + 1))
}

impl fmt::Display for TensorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorModel::ComplexGinibre => write!(f, "complex-ginibre"),
            TensorModel::RealGinibre => write!(f, "real-ginibre"),
            TensorModel::Diluted { p, base } => {
                let b = match base {
                    BaseLaw::ComplexGaussian => "complex-gaussian".to_string(),
                    BaseLaw::RealGaussian => "real-gaussian".to_string(),
                    BaseLaw::Rademacher => "rademacher".to_string(),
                    BaseLaw::PointMass { re, im } => format!("point:{re}:{im}"),
                };
                write!(f, "diluted:p={p},base={b}")
            }
        }
    }
}

/// Accepts `complex-ginibre`, `real-ginibre` and `diluted:p=<prob>[,base=<law>]`
/// with `<law>` one of `complex-gaussian` (default), `real-gaussian`, `rademacher`,
/// `point:<re>:<im>`.
impl FromStr for TensorModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let model = match s {
            "complex-ginibre" | "complex" => TensorModel::ComplexGinibre,
            "real-ginibre" | "real" => TensorModel::RealGinibre,
            _ => {
                let rest =
                    s.strip_prefix("diluted:").ok_or_else(|| Error::InvalidModel(format!("unknown model '{s}'")))?;
                let mut p = None;
                let mut base = BaseLaw::ComplexGaussian;
                for kv in rest.split(',') {
                    let (key, val) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidModel(format!("expected key=value, got '{kv}'")))?;
                    match key.trim() {
                        "p" => p = Some(val.trim().parse::<f64>().map_err(|e| Error::InvalidModel(format!("p: {e}")))?),
                        "base" => base = parse_base(val.trim())?,
                        other => return Err(Error::InvalidModel(format!("unknown key '{other}'"))),
                    }
                }
                let p = p.ok_or_else(|| Error::InvalidModel("diluted model needs p".into()))?;
                TensorModel::Diluted { p, base }
            }
        };
        model.validate()?;
        Ok(model)
    }
}

fn parse_base(s: &str) -> Result<BaseLaw> {
    Ok(match s {
        "complex-gaussian" => BaseLaw::ComplexGaussian,
        "real-gaussian" => BaseLaw::RealGaussian,
        "rademacher" => BaseLaw::Rademacher,
        _ => {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 || parts[0] != "point" {
                return Err(Error::InvalidModel(format!("unknown base law '{s}'")));
            }
            let f = |x: &str| x.parse::<f64>().map_err(|e| Error::InvalidModel(format!("point mass: {e}")));
            BaseLaw::PointMass { re: f(parts[1])?, im: f(parts[2])? }
        }
    })
}

/// Row-major linearization of `[N]^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultiIndexCodec {
    pub n: usize,
    pub k: usize,
}

impl MultiIndexCodec {
    pub fn new(n: usize, k: usize) -> Self {
        MultiIndexCodec { n, k }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.k as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.k);
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn decode_into(&self, mut x: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = x % self.n;
            x /= self.n;
        }
    }

    pub fn decode(&self, x: usize) -> Vec<usize> {
        let mut out = vec![0; self.k];
        self.decode_into(x, &mut out);
        out
    }
}

fn checked_pow(n: usize, e: usize) -> Option<usize> {
    n.checked_pow(e as u32)
}

/// Dense `N^{2k}` array of complex entries in codec order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    n: usize,
    k: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Tensor<T> {
    pub fn from_data(n: usize, k: usize, data: Vec<Complex<T>>) -> Result<Self> {
        let want = checked_pow(n, 2 * k).ok_or(Error::BoundExceeded {
            what: "tensor entries",
            value: usize::MAX,
            bound: MAX_TENSOR_ENTRIES,
        })?;
        if data.len() != want {
            return Err(Error::InvalidInput(format!("tensor needs {want} entries, got {}", data.len())));
        }
        Ok(Tensor { n, k, data })
    }

    pub fn from_fn(n: usize, k: usize, f: impl Fn(&[usize]) -> Complex<T>) -> Result<Self> {
        let codec = MultiIndexCodec::new(n, 2 * k);
        let total = tensor_len(n, k)?;
        let mut idx = vec![0; 2 * k];
        let data = (0..total)
            .map(|x| {
                codec.decode_into(x, &mut idx);
                f(&idx)
            })
            .collect();
        Ok(Tensor { n, k, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> Complex<T> {
        self.data[MultiIndexCodec::new(self.n, 2 * self.k).encode(idx)]
    }

    pub fn to_f64(&self) -> Tensor<f64> {
        Tensor { n: self.n, k: self.k, data: self.data.iter().map(|z| c64(*z)).collect() }
    }

    /// Binary layout: magic `TFTN`, then little-endian `u32` version, N, k, dtype,
    /// then interleaved `(re, im)` `f64` pairs in codec order.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        write_header(w, b"TFTN", self.n, self.k)?;
        write_payload(w, &self.data)
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Tensor<f64>> {
        let (n, k) = read_header(r, b"TFTN")?;
        let len = tensor_len(n, k)?;
        Ok(Tensor { n, k, data: read_payload(r, len)? })
    }

    /// One line per entry: 1-based indices, then `re,im`.
    pub fn to_csv(&self) -> Result<String> {
        if self.data.len() > MAX_CSV_ENTRIES {
            return Err(Error::BoundExceeded { what: "csv entries", value: self.data.len(), bound: MAX_CSV_ENTRIES });
        }
        let codec = MultiIndexCodec::new(self.n, 2 * self.k);
        let mut out: String = (1..=2 * self.k).map(|i| format!("i{i},")).collect();
        out.push_str("re,im\n");
        for (x, z) in self.data.iter().enumerate() {
            for i in codec.decode(x) {
                out.push_str(&format!("{},", i + 1));
            }
            out.push_str(&format!("{},{}\n", z.re, z.im));
        }
        Ok(out)
    }
}

fn tensor_len(n: usize, k: usize) -> Result<usize> {
    match checked_pow(n, 2 * k) {
        Some(v) if v <= MAX_TENSOR_ENTRIES => Ok(v),
        other => Err(Error::BoundExceeded {
            what: "tensor entries N^2k",
            value: other.unwrap_or(usize::MAX),
            bound: MAX_TENSOR_ENTRIES,
        }),
    }
}

fn c64<T: Real>(z: Complex<T>) -> Complex64 {
    Complex64::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap())
}

fn cast<T: Real>(z: Complex64) -> Complex<T> {
    Complex::new(T::from_f64(z.re).unwrap(), T::from_f64(z.im).unwrap())
}

fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], n: usize, k: usize) -> Result<()> {
    w.write_all(magic)?;
    for v in [1u32, n as u32, k as u32, 2u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn write_payload<W: Write, T: Real>(w: &mut W, data: &[Complex<T>]) -> Result<()> {
    let mut buf = Vec::with_capacity(16 * data.len());
    for z in data {
        buf.extend_from_slice(&z.re.to_f64().unwrap().to_le_bytes());
        buf.extend_from_slice(&z.im.to_f64().unwrap().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<(usize, usize)> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::InvalidInput(format!("bad magic {m:?}")));
    }
    let version = read_u32(r)?;
    let (n, k, dtype) = (read_u32(r)? as usize, read_u32(r)? as usize, read_u32(r)?);
    if version != 1 || dtype != 2 {
        return Err(Error::InvalidInput(format!("unsupported version {version} / dtype {dtype}")));
    }
    Ok((n, k))
}

fn read_payload<R: Read>(r: &mut R, len: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; 16 * len];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect())
}

/// Draw a tensor from stream 0 of `seed`.
pub fn sample_tensor<T: Real>(model: &TensorModel, n: usize, k: usize, seed: u64) -> Result<Tensor<T>> {
    sample_tensor_stream(model, n, k, seed, 0)
}

/// Draw a tensor from an independent stream of `seed`; trial `t` uses stream `t`.
pub fn sample_tensor_stream<T: Real>(
    model: &TensorModel,
    n: usize,
    k: usize,
    seed: u64,
    stream: u64,
) -> Result<Tensor<T>> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput(format!("N = {n} and k = {k} must be positive")));
    }
    model.validate()?;
    let len = tensor_len(n, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let scale = model.dilution_scale(n, k);
    let data = (0..len).map(|_| cast(model.sample_entry(&mut rng, scale))).collect();
    Ok(Tensor { n, k, data })
}

/// Square complex matrix of side `N^k`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    k: usize,
    side: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize, k: usize) -> Self {
        let side = n.pow(k as u32);
        Matrix { n, k, side, data: vec![Complex::zero(); side * side] }
    }

    pub fn identity(n: usize, k: usize) -> Self {
        let mut m = Self::zeros(n, k);
        for i in 0..m.side {
            m.data[i * m.side + i] = Complex::one();
        }
        m
    }

    pub fn from_fn(n: usize, k: usize, f: impl Fn(usize, usize) -> Complex<T>) -> Self {
        let side = n.pow(k as u32);
        let data = (0..side * side).map(|x| f(x / side, x % side)).collect();
        Matrix { n, k, side, data }
    }

    pub fn from_data(n: usize, k: usize, data: Vec<Complex<T>>) -> Result<Self> {
        let side = n.pow(k as u32);
        if data.len() != side * side {
            return Err(Error::InvalidInput(format!("matrix of side {side} needs {} entries", side * side)));
        }
        Ok(Matrix { n, k, side, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.side + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.side + c] = v;
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.side != other.side {
            return Err(Error::DegreeMismatch { left: self.side, right: other.side });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = Self { data: vec![Complex::zero(); self.data.len()], ..*self.shape_only() };
        T::gemm(self.side, self.side, self.side, &self.data, &other.data, &mut out.data);
        Ok(out)
    }

    fn shape_only(&self) -> &Self {
        self
    }

    pub fn adjoint(&self) -> Self {
        let s = self.side;
        let mut data = vec![Complex::zero(); s * s];
        for r in 0..s {
            for c in 0..s {
                data[c * s + r] = self.data[r * s + c].conj();
            }
        }
        Matrix { data, ..*self }
    }

    pub fn transpose(&self) -> Self {
        let s = self.side;
        let mut data = vec![Complex::zero(); s * s];
        for r in 0..s {
            for c in 0..s {
                data[c * s + r] = self.data[r * s + c];
            }
        }
        Matrix { data, ..*self }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Matrix { data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(), ..*self })
    }

    pub fn add_scaled_assign(&mut self, other: &Self, c: T) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b * c;
        }
        Ok(())
    }

    /// `self += c * other` for a complex `c`.
    pub fn add_complex_scaled_assign(&mut self, other: &Self, c: Complex<T>) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b * c;
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    pub fn scale(&self, c: T) -> Self {
        Matrix { data: self.data.iter().map(|a| a * c).collect(), ..*self }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.side).fold(Complex::zero(), |acc, i| acc + self.data[i * self.side + i])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm().to_f64().unwrap()).fold(0.0, f64::max)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr().to_f64().unwrap()).sum()
    }

    /// `max |A - A^*|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        let s = self.side;
        let mut m: f64 = 0.0;
        for r in 0..s {
            for c in r..s {
                m = m.max((self.data[r * s + c] - self.data[c * s + r].conj()).norm().to_f64().unwrap());
            }
        }
        m
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix { n: self.n, k: self.k, side: self.side, data: self.data.iter().map(|z| c64(*z)).collect() }
    }

    /// Same layout as [`Tensor::write_binary`] with magic `TFMX`.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        write_header(w, b"TFMX", self.n, self.k)?;
        write_payload(w, &self.data)
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Matrix<f64>> {
        let (n, k) = read_header(r, b"TFMX")?;
        let side = checked_pow(n, k).ok_or_else(|| Error::InvalidInput("matrix side overflows".into()))?;
        Matrix::from_data(n, k, read_payload(r, side * side)?)
    }

    /// One line per entry: 1-based `row,col,re,im`.
    pub fn to_csv(&self) -> Result<String> {
        if self.data.len() > MAX_CSV_ENTRIES {
            return Err(Error::BoundExceeded { what: "csv entries", value: self.data.len(), bound: MAX_CSV_ENTRIES });
        }
        let mut out = String::from("row,col,re,im\n");
        for (x, z) in self.data.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", x / self.side + 1, x % self.side + 1, z.re, z.im));
        }
        Ok(out)
    }
}

/// `M_{N, sigma}`.
pub fn flatten<T: Real>(t: &Tensor<T>, sigma: &Permutation) -> Result<Matrix<T>> {
    let (n, k) = (t.n, t.k);
    if sigma.degree() != 2 * k {
        return Err(Error::DegreeMismatch { left: 2 * k, right: sigma.degree() });
    }
    // tensor slot p carries matrix index y_{sigma(p)}
    let stride: Vec<usize> = (0..2 * k).map(|p| n.pow((2 * k - 1 - sigma.apply(p)) as u32)).collect();
    let mut out = Matrix::zeros(n, k);
    let mut digits = vec![0usize; 2 * k];
    let mut target = 0usize;
    for &v in &t.data {
        out.data[target] = v;
        // odometer over tensor digits, last slot fastest
        for p in (0..2 * k).rev() {
            digits[p] += 1;
            target += stride[p];
            if digits[p] < n {
                break;
            }
            digits[p] = 0;
            target -= n * stride[p];
        }
    }
    Ok(out)
}

/// `table[i] = encode(j)` with `j_s = i_{eta(s)}`: the unique column where row `i` of `U_eta` is 1.
pub fn index_table(eta: &Permutation, n: usize) -> Vec<usize> {
    let k = eta.degree();
    let codec = MultiIndexCodec::new(n, k);
    let mut i = vec![0; k];
    let mut j = vec![0; k];
    (0..codec.len())
        .map(|x| {
            codec.decode_into(x, &mut i);
            for s in 0..k {
                j[s] = i[eta.apply(s)];
            }
            codec.encode(&j)
        })
        .collect()
}

/// Dense `U_{N, eta}`.
pub fn perm_matrix<T: Real>(eta: &Permutation, n: usize) -> Matrix<T> {
    let table = index_table(eta, n);
    let mut m = Matrix::zeros(n, eta.degree());
    for (i, &j) in table.iter().enumerate() {
        m.set(i, j, Complex::one());
    }
    m
}

/// `U_eta A`, as a row gather.
pub fn apply_left<T: Real>(eta: &Permutation, a: &Matrix<T>) -> Matrix<T> {
    let table = index_table(eta, a.n);
    let s = a.side;
    let mut data = Vec::with_capacity(s * s);
    for &src in &table {
        data.extend_from_slice(&a.data[src * s..(src + 1) * s]);
    }
    Matrix { data, ..*a }
}

/// `A U_eta^*`, as a column gather.
pub fn apply_right_adjoint<T: Real>(a: &Matrix<T>, eta: &Permutation) -> Matrix<T> {
    let table = index_table(eta, a.n);
    let s = a.side;
    let mut data = vec![Complex::zero(); s * s];
    for r in 0..s {
        let row = &a.data[r * s..(r + 1) * s];
        for (c, &src) in table.iter().enumerate() {
            data[r * s + c] = row[src];
        }
    }
    Matrix { data, ..*a }
}

/// `A U_eta`.
pub fn apply_right<T: Real>(a: &Matrix<T>, eta: &Permutation) -> Matrix<T> {
    apply_right_adjoint(a, &eta.inverse())
}

/// `Phi_N(A) = Tr(A)/N^k` for a single realization.
pub fn phi_n<T: Real>(a: &Matrix<T>) -> Complex64 {
    c64(a.trace()) / a.side as f64
}

/// Output of [`cond_expect_n`]; `unique` is false when `N < k`, where the
/// `U_eta` are linearly dependent and the coefficients are not the only decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionalExpectation {
    pub value: GroupAlgebraElement<Complex64>,
    pub unique: bool,
}

/// `sum_eta Phi_N(A U_eta^*) u_eta`, by permuted trace sums.
pub fn cond_expect_n<T: Real>(a: &Matrix<T>) -> Result<ConditionalExpectation> {
    let (n, k) = (a.n, a.k);
    let mut value = GroupAlgebraElement::zero(k);
    for eta in enumerate_group(k)? {
        let table = index_table(&eta, n);
        let s: Complex64 = table.iter().enumerate().map(|(i, &j)| c64(a.get(i, j))).sum();
        value.add_term(&eta, s / a.side as f64);
    }
    Ok(ConditionalExpectation { value, unique: n >= k })
}

/// `prod_l M_{sigma_l}^{eps_l} U_{eta_l}`; the empty word gives the identity.
pub fn word_eval<T: Real>(t: &Tensor<T>, word: &Word) -> Result<Matrix<T>> {
    if word.k != t.k {
        return Err(Error::DegreeMismatch { left: t.k, right: word.k });
    }
    let mut cache: HashMap<&Permutation, Matrix<T>> = HashMap::new();
    let mut acc: Option<Matrix<T>> = None;
    for (letter, eta) in word.letters.iter().zip(&word.etas) {
        if !cache.contains_key(&letter.sigma) {
            cache.insert(&letter.sigma, flatten(t, &letter.sigma)?);
        }
        let m = &cache[&letter.sigma];
        let m = match letter.eps {
            Eps::One => m.clone(),
            Eps::Star => m.adjoint(),
        };
        let m = if eta.is_identity() { m } else { apply_right(&m, eta) };
        acc = Some(match acc {
            None => m,
            Some(a) => a.matmul(&m)?,
        });
    }
    Ok(acc.unwrap_or_else(|| Matrix::identity(t.n, t.k)))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChoiReport {
    pub min_eigenvalue: f64,
    pub idempotency_defect: f64,
}

/// Builds `C = sum_eta U_eta ⊗ conj(U_eta)` and reports its least eigenvalue and
/// `max |C^2 - k! C|`.
pub fn choi_check(n: usize, k: usize) -> Result<ChoiReport> {
    let side = checked_pow(n, 2 * k).unwrap_or(usize::MAX);
    if side > MAX_CHOI_SIDE {
        return Err(Error::BoundExceeded { what: "Choi matrix side N^2k", value: side, bound: MAX_CHOI_SIDE });
    }
    let m = n.pow(k as u32);
    let mut c = DMatrix::<f64>::zeros(side, side);
    for eta in enumerate_group(k)? {
        let table = index_table(&eta, n);
        for i in 0..m {
            for i2 in 0..m {
                c[(i * m + i2, table[i] * m + table[i2])] += 1.0;
            }
        }
    }
    let kf = factorial(k) as f64;
    let defect = (&c * &c - &c * kf).amax();
    let min_eigenvalue = c.symmetric_eigenvalues().min();
    Ok(ChoiReport { min_eigenvalue, idempotency_defect: defect })
}
