//! Flattenings of random tensors as operator-valued random matrices over `C[S_k]`.
//!
//! The crate is organized around the objects it computes with:
//! permutations and characters ([`perm`]), the group algebra ([`group_algebra`]),
//! sampled tensors and their flattenings ([`tensor`]), the non-crossing Wick
//! recursion for limiting moments ([`analytic`]), exact finite-N traffic sums
//! ([`traffic`]) and spectral experiments ([`spectra`]).

pub mod analytic;
pub mod checks;
pub mod error;
pub mod group_algebra;
pub mod perm;
pub mod scalar;
pub mod spectra;
pub mod tensor;
pub mod traffic;
pub mod word;

pub use error::{Error, Result};
pub use group_algebra::GroupAlgebraElement;
pub use perm::Permutation;
pub use tensor::{Matrix, Tensor, TensorModel};
pub use word::{Eps, Letter, Word};

use num_complex::Complex64;
use num_rational::Rational64;

/// `C[S_k]` with complex coefficients.
pub type AlgebraElement = GroupAlgebraElement<Complex64>;
/// `Q[S_k]`, for exact moment computations.
pub type ExactAlgebraElement = GroupAlgebraElement<Rational64>;
pub type IntAlgebraElement = GroupAlgebraElement<i64>;
pub type FlatMatrix = Matrix<f64>;
pub type FlatMatrix32 = Matrix<f32>;
pub type RandomTensor = Tensor<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
