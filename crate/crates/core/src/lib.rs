//! Learned CountSketch compression for sketched numerical optimization.
//!
//! A CountSketch compresses an `n × d` matrix by hashing rows (or columns)
//! into a small number of signed bins. This crate learns both the bin
//! *positions* (greedy placement) and the nonzero *values* (gradient
//! descent on a surrogate loss) of such sketches from training data, and
//! provides the two sketched solvers they accelerate: low-rank
//! approximation and k-means clustering. Worst-case behaviour is recovered
//! by running a classical random sketch side by side and keeping the
//! cheaper solution, or by stacking sketches (the quality of the sketched
//! solution never degrades when rows are appended).
//!
//! Core math is generic over the scalar type via [`Scalar`]; the `f64`
//! aliases at the crate root are what the CLI and file formats use.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, NumAssign};

pub mod gen;
pub mod io;
pub mod kmeans;
pub mod learn;
pub mod lra;
pub mod matlin;
pub mod sketch;
pub mod verify;

/// Floating-point scalar the numeric kernels are generic over.
pub trait Scalar:
    Float + NumAssign + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + NumAssign + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

/// Relative cutoff for numerical rank decisions (`tol · σ_max`).
pub const RANK_REL_TOL: f64 = 1e-12;

pub(crate) fn cast<F: Scalar>(x: f64) -> F {
    F::from(x).expect("constant not representable in scalar type")
}

/// Errors reported by library operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Shape mismatch, out-of-range index or otherwise malformed argument.
    InvalidInput(String),
    /// A computation produced (or was handed) NaN/Inf.
    NonFinite(String),
    /// File format or filesystem problem.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;



pub use kmeans::Clustering;
pub use lra::{LowRankFactors, LraSketchSet};
pub use sketch::{AnySketch, CountSketch, StackedSketch};

/// Default double-precision matrix.
pub type Matrix = matlin::DenseMatrix<f64>;
/// Single-precision matrix.
pub type Matrix32 = matlin::DenseMatrix<f32>;
/// Default double-precision SVD.
pub type Svd = matlin::SvdResult<f64>;
/// Default double-precision CountSketch.
pub type Sketch64 = sketch::CountSketch<f64>;
