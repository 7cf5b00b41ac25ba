//! Correlated random Toeplitz, generalized Toeplitz, Hankel and backward-identity
//! matrices.
//!
//! The crate realizes structured matrices from pair-correlated inputs, computes exact
//! traces of monomial words in them, evaluates limiting tracial `*`-moments by
//! pair-partition enumeration and indicator-volume integration, and runs the Monte Carlo
//! and spectral studies that compare the two.
//!
//! Numeric kernels (structured matvec, trace propagation, Jacobi) are generic over
//! [`Scalar`]; the aliases below fix them to `f64`.

#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod dense;
pub mod ensembles;
pub mod error;
pub mod limits;
pub mod model;
pub mod ops;
pub mod partitions;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use model::{
    BaseDistribution, CorrelationSpec, DeterministicSymbol, Flavor, Letter, LetterKind, MonomialWord, SymbolFamily,
    ValidatedSpec, WordPolynomial,
};

/// Complex number over `f64`.
pub type C64 = num_complex::Complex<f64>;

/// Structured matrix over `f64`.
pub type Matrix = ensembles::StructuredMatrix<f64>;

/// Dense complex matrix over `f64`.
pub type DenseMatrix = dense::DenseMatrix<f64>;

/// Realized copies of every matrix a word refers to, over `f64`.
pub type Realization = ensembles::Realization<f64>;

/// Tool version embedded in every output artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
