//! Scalar abstractions.
//!
//! [`Scalar`] covers every coefficient ring used by the group algebra (floats,
//! complex floats, machine integers, rationals). [`Real`] is the element type
//! of dense matrices; entries are always `Complex<R>`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{Float, FromPrimitive, One, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn conj(&self) -> Self;
    /// Absolute value as `f64`, used for tolerance comparisons.
    fn magnitude(&self) -> f64;
    fn from_i64(v: i64) -> Self;
    /// Best-effort complex view, for reporting.
    fn to_c64(&self) -> Complex<f64>;
}

macro_rules! real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn conj(&self) -> Self {
                *self
            }
            fn magnitude(&self) -> f64 {
                (*self as f64).abs()
            }
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn to_c64(&self) -> Complex<f64> {
                Complex::new(*self as f64, 0.0)
            }
        }
    };
}

real_scalar!(f32);
real_scalar!(f64);
real_scalar!(i64);

impl Scalar for Rational64 {
    fn conj(&self) -> Self {
        *self
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN).abs()
    }
    fn from_i64(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl<R: Real> Scalar for Complex<R> {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn magnitude(&self) -> f64 {
        self.norm().to_f64().unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(R::from_i64(v).unwrap(), R::zero())
    }
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
}

/// Floating-point element type of tensors and flattenings.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + AddAssign + Send + Sync + 'static
{
    /// Short dtype tag used by the binary dump format.
    const DTYPE: u32;

    /// Row-major `c = a * b` with `a: m x k`, `b: k x n`.
    fn gemm(m: usize, k: usize, n: usize, a: &[Complex<Self>], b: &[Complex<Self>], c: &mut [Complex<Self>]);
}

impl Real for f64 {
    const DTYPE: u32 = 2;

    fn gemm(m: usize, k: usize, n: usize, a: &[Complex<f64>], b: &[Complex<f64>], c: &mut [Complex<f64>]) {
        assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
        if m == 0 || n == 0 {
            return;
        }
        // SAFETY: Complex<f64> is repr(C) { re, im }, layout-identical to [f64; 2];
        // the slices were checked to cover the strided ranges.
        unsafe {
            matrixmultiply::zgemm(
                matrixmultiply::CGemmOption::Standard,
                matrixmultiply::CGemmOption::Standard,
                m,
                k,
                n,
                [1.0, 0.0],
                a.as_ptr() as *const [f64; 2],
                k as isize,
                1,
                b.as_ptr() as *const [f64; 2],
                n as isize,
                1,
                [0.0, 0.0],
                c.as_mut_ptr() as *mut [f64; 2],
                n as isize,
                1,
            );
        }
    }
}

impl Real for f32 {
    const DTYPE: u32 = 1;

    fn gemm(m: usize, k: usize, n: usize, a: &[Complex<f32>], b: &[Complex<f32>], c: &mut [Complex<f32>]) {
        assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
        if m == 0 || n == 0 {
            return;
        }
        // SAFETY: as for f64.
        unsafe {
            matrixmultiply::cgemm(
                matrixmultiply::CGemmOption::Standard,
                matrixmultiply::CGemmOption::Standard,
                m,
                k,
                n,
                [1.0, 0.0],
                a.as_ptr() as *const [f32; 2],
                k as isize,
                1,
                b.as_ptr() as *const [f32; 2],
                n as isize,
                1,
                [0.0, 0.0],
                c.as_mut_ptr() as *mut [f32; 2],
                n as isize,
                1,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_matches_naive_product() {
        let a: Vec<Complex<f64>> = (0..6).map(|i| Complex::new(i as f64, 1.0 - i as f64)).collect();
        let b: Vec<Complex<f64>> = (0..12).map(|i| Complex::new(0.5 * i as f64, (i % 3) as f64)).collect();
        let mut c = vec![Complex::zero(); 8];
        f64::gemm(2, 3, 4, &a, &b, &mut c);
        for i in 0..2 {
            for j in 0..4 {
                let want: Complex<f64> = (0..3).map(|l| a[i * 3 + l] * b[l * 4 + j]).sum();
                assert!((c[i * 4 + j] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn f32_gemm_runs() {
        let a = vec![Complex::new(1.0f32, 2.0); 4];
        let b = vec![Complex::new(0.0f32, 1.0); 4];
        let mut c = vec![Complex::zero(); 4];
        f32::gemm(2, 2, 2, &a, &b, &mut c);
        assert_eq!(c[0], Complex::new(-4.0, 2.0));
    }

    #[test]
    fn rational_conj_is_identity() {
        let r = Rational64::new(3, 7);
        assert_eq!(Scalar::conj(&r), r);
        assert!((r.magnitude() - 3.0 / 7.0).abs() < 1e-15);
    }
}
