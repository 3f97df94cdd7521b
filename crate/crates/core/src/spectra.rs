//! Normalized sums of all flattenings, their trace-power moments and eigenvalue
//! histograms, averaged over independent tensors.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::analytic::Target;
use crate::analytic::{predicted_moments, target_scale, Mixture, MAX_MOMENT_ORDER};
use crate::error::{Error, Result};
use crate::perm::enumerate_group;
use crate::scalar::Real;
use crate::tensor::{flatten, sample_tensor_stream, Matrix, Tensor, TensorModel};
use crate::word::Eps;

/// Largest matrix side handed to the eigensolver.
pub const MAX_EIGEN_SIDE: usize = 4096;

/// `sum a(sigma, eps) M_sigma^eps` for a mixture with complex coefficients.
pub fn build_mixture<T: Real>(t: &Tensor<T>, m: &Mixture<Complex64>) -> Result<Matrix<T>> {
    if m.k() != t.k() {
        return Err(Error::DegreeMismatch { left: t.k(), right: m.k() });
    }
    let mut ones = Matrix::zeros(t.n(), t.k());
    let mut stars = Matrix::zeros(t.n(), t.k());
    let mut any_star = false;
    for (letter, &a) in m.terms() {
        let f = flatten(t, &letter.sigma)?;
        let coef = Complex::new(T::from_f64(a.re).unwrap(), T::from_f64(a.im).unwrap());
        // M^* terms are gathered as conj(a) M and adjointed once at the end
        let (acc, coef) = match letter.eps {
            Eps::One => (&mut ones, coef),
            Eps::Star => {
                any_star = true;
                (&mut stars, coef.conj())
            }
        };
        acc.add_complex_scaled_assign(&f, coef)?;
    }
    if any_star {
        ones = ones.add(&stars.adjoint())?;
    }
    Ok(ones)
}

/// `S1`, `S2` or `S3` built from one tensor, normalized with the model's `(c, c')`.
pub fn build_target<T: Real>(t: &Tensor<T>, which: Target, model: &TensorModel) -> Result<Matrix<T>> {
    let (c, cp) = model.parameter();
    let k = t.k();
    let scale = T::from_f64(target_scale(which, k, c, cp)?).unwrap();
    let mut acc = Matrix::zeros(t.n(), k);
    for sigma in enumerate_group(2 * k)? {
        let sign = match which {
            Target::S2 => T::from_i64(sigma.signature()).unwrap(),
            _ => T::one(),
        };
        acc.add_scaled_assign(&flatten(t, &sigma)?, sign)?;
    }
    if which == Target::S3 {
        acc = acc.add(&acc.adjoint())?;
    }
    Ok(acc.scale(scale))
}

/// `Phi_N[(A A^*)^n]`, or `Phi_N[A^n]` when `hermitian`, for `n = 1..=n_max`.
///
/// For a Hermitian base `B` with powers `P_j = B^j`, even moments are `|P_m|_F^2` and odd
/// ones `<P_m, P_{m+1}>`, so only `ceil(n_max / 2)` products are formed.
pub fn trace_power_moments<T: Real>(a: &Matrix<T>, hermitian: bool, n_max: usize) -> Result<Vec<Complex64>> {
    if n_max > MAX_MOMENT_ORDER {
        return Err(Error::BoundExceeded { what: "moment order", value: n_max, bound: MAX_MOMENT_ORDER });
    }
    let side = a.side() as f64;
    let base = if hermitian { a.clone() } else { a.matmul(&a.adjoint())? };
    let scale = base.data().iter().map(|z| z.norm().to_f64().unwrap()).fold(0.0, f64::max).max(1.0);
    if hermitian && base.hermitian_defect() > 1e-10 * scale {
        // plain iteration for a non-Hermitian input
        let mut out = Vec::with_capacity(n_max);
        let mut p = base.clone();
        for n in 1..=n_max {
            if n > 1 {
                p = p.matmul(&base)?;
            }
            out.push(c64(p.trace()) / side);
        }
        return Ok(out);
    }
    let half = n_max.div_ceil(2);
    let mut powers = vec![base.clone()];
    while powers.len() < half + 1 && powers.len() < n_max {
        let next = powers.last().unwrap().matmul(&base)?;
        powers.push(next);
    }
    let inner = |x: &Matrix<T>, y: &Matrix<T>| -> Complex64 {
        x.data().iter().zip(y.data()).map(|(u, v)| c64(u.conj() * v)).sum::<Complex64>() / side
    };
    Ok((1..=n_max)
        .map(|n| {
            if n == 1 {
                c64(base.trace()) / side
            } else if n % 2 == 0 {
                let p = &powers[n / 2 - 1];
                inner(p, p)
            } else {
                inner(&powers[n / 2 - 1], &powers[n / 2])
            }
        })
        .collect())
}

fn c64<T: Real>(z: Complex<T>) -> Complex64 {
    Complex64::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap())
}

/// Sorted real spectrum of `A` (when `hermitian`) or of `A A^*`.
pub fn empirical_spectrum<T: Real>(a: &Matrix<T>, hermitian: bool) -> Result<Vec<f64>> {
    let side = a.side();
    if side > MAX_EIGEN_SIDE {
        return Err(Error::BoundExceeded { what: "eigensolver side", value: side, bound: MAX_EIGEN_SIDE });
    }
    let b = if hermitian {
        let scale = a.data().iter().map(|z| z.norm().to_f64().unwrap()).fold(0.0, f64::max).max(1.0);
        let defect = a.hermitian_defect();
        if defect > 1e-10 * scale {
            return Err(Error::NotHermitian(defect));
        }
        a.to_f64()
    } else {
        a.matmul(&a.adjoint())?.to_f64()
    };
    let m = DMatrix::from_row_slice(side, side, b.data());
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Half-width of the window reported as the atom at zero.
    pub zero_delta: f64,
    /// Fraction of eigenvalues in `[-zero_delta, zero_delta]`.
    pub zero_fraction: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Freedman–Diaconis bins over the pooled values (Sturges when the IQR vanishes);
/// the zero window is `3 IQR / side`.
pub fn histogram(values: &[f64], side: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::InvalidInput("histogram of no values".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let iqr = quantile(&v, 0.75) - quantile(&v, 0.25);
    let n = v.len() as f64;
    let sturges = (n.log2().ceil() as usize + 1).max(1);
    let bins = if iqr > 0.0 && hi > lo {
        let width = 2.0 * iqr / n.cbrt();
        (((hi - lo) / width).ceil() as usize).clamp(1, 10_000)
    } else {
        sturges
    };
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for &x in &v {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let zero_delta = 3.0 * iqr / side as f64;
    let zero = v.iter().filter(|x| x.abs() <= zero_delta).count();
    Ok(Histogram { edges, counts, zero_delta, zero_fraction: zero as f64 / n })
}

impl Histogram {
    /// Bar plot of bin densities.
    pub fn to_svg(&self, title: &str) -> String {
        let (w, h, pad) = (640.0, 360.0, 40.0);
        let total: u64 = self.counts.iter().sum();
        let lo = self.edges[0];
        let hi = *self.edges.last().unwrap();
        let span = (hi - lo).max(f64::EPSILON);
        let dens: Vec<f64> = self
            .counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| c as f64 / (total.max(1) as f64 * (e[1] - e[0]).max(f64::EPSILON)))
            .collect();
        let top = dens.iter().copied().fold(0.0, f64::max).max(f64::EPSILON);
        let mut s = String::new();
        let _ =
            writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"#,
            w / 2.0
        );
        for (d, e) in dens.iter().zip(self.edges.windows(2)) {
            let x0 = pad + (e[0] - lo) / span * (w - 2.0 * pad);
            let x1 = pad + (e[1] - lo) / span * (w - 2.0 * pad);
            let bh = d / top * (h - 2.0 * pad);
            let _ = writeln!(
                s,
                r##"<rect x="{x0:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="#4a7ab5"/>"##,
                h - pad - bh,
                (x1 - x0).max(0.5)
            );
        }
        let _ = writeln!(s, r#"<line x1="{pad}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#, h - pad, w - pad);
        let _ = writeln!(
            s,
            r#"<text x="{pad}" y="{}" font-family="sans-serif" font-size="11">{lo:.3}</text>"#,
            h - pad + 15.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{hi:.3}</text>"#,
            w - pad,
            h - pad + 15.0
        );
        s.push_str("</svg>\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: TensorModel,
    pub target: Target,
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub n_max: usize,
    pub seed: u64,
    pub histogram: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    pub predicted: f64,
    pub empirical: f64,
    pub empirical_im: f64,
    /// Standard error of the trial mean; absent with a single trial.
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub config: ExperimentConfig,
    pub moments: Vec<MomentRow>,
    pub histogram: Option<Histogram>,
}

impl SpectralReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,predicted,empirical,stderr\n");
        for r in &self.moments {
            let se = r.stderr.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{}", r.n, r.predicted, r.empirical, se);
        }
        s
    }

    /// Largest `|empirical / predicted - 1|` over rows with non-zero prediction.
    pub fn max_relative_error(&self) -> f64 {
        self.moments
            .iter()
            .filter(|r| r.predicted != 0.0)
            .map(|r| (r.empirical / r.predicted - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-trial results, trial `t` drawn from stream `t` of `seed`.
fn run_trial(cfg: &ExperimentConfig, trial: u64) -> Result<(Vec<Complex64>, Option<Vec<f64>>)> {
    let t: Tensor<f64> = sample_tensor_stream(&cfg.model, cfg.n, cfg.k, cfg.seed, trial)?;
    let s = build_target(&t, cfg.target, &cfg.model)?;
    let herm = cfg.target.is_hermitian();
    let m = trace_power_moments(&s, herm, cfg.n_max)?;
    let spec = if cfg.histogram { Some(empirical_spectrum(&s, herm)?) } else { None };
    Ok((m, spec))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SpectralReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("at least one trial is needed".into()));
    }
    let side = cfg.n.checked_pow(cfg.k as u32).unwrap_or(usize::MAX);
    if cfg.histogram && side > MAX_EIGEN_SIDE {
        return Err(Error::BoundExceeded { what: "eigensolver side", value: side, bound: MAX_EIGEN_SIDE });
    }
    let predicted = predicted_moments(cfg.target, cfg.k, cfg.n_max)?;
    let results: Vec<(Vec<Complex64>, Option<Vec<f64>>)> =
        (0..cfg.trials as u64).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<_>>()?;
    let tn = cfg.trials as f64;
    let moments = (0..cfg.n_max)
        .map(|i| {
            let vals: Vec<Complex64> = results.iter().map(|r| r.0[i]).collect();
            let mean = vals.iter().sum::<Complex64>() / tn;
            let stderr = (cfg.trials > 1).then(|| {
                let var = vals.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / (tn - 1.0);
                (var / tn).sqrt()
            });
            MomentRow { n: i + 1, predicted: predicted[i], empirical: mean.re, empirical_im: mean.im, stderr }
        })
        .collect();
    let histogram = if cfg.histogram {
        let pooled: Vec<f64> = results.iter().flat_map(|r| r.1.clone().unwrap_or_default()).collect();
        Some(histogram(&pooled, side)?)
    } else {
        None
    };
    Ok(SpectralReport { config: cfg.clone(), moments, histogram })
}

/// `Phi_N[A A^*]` from the entries alone.
pub fn frobenius_moment<T: Real>(a: &Matrix<T>) -> f64 {
    a.frobenius_sq() / a.side() as f64
}
