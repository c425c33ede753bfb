//! Uniform discretization of continuous frames.
//!
//! A continuous frame `Ψ: X → H` over a metric measure space is modeled by a
//! finite quadrature grid and an `n`-dimensional model of `H`. The crate
//! samples the frame with dyadic weights, thins the sample with binary
//! selectors until at most two points fall in each cell, and then runs
//! pairing cycles until the surviving points are uniformly separated. Every
//! inequality along the way is checked numerically and recorded in a
//! certificate.
//!
//! The crate is `no_std` and only needs `alloc`; IO, configuration and the
//! command line live in the companion `framedisc` crate.
//!
//! Module map:
//!
//! * [`operators`]: Hermitian operators, rank-one sums, spectra, subspaces.
//! * [`spaces`]: metric measure spaces, grids, nets and cell partitions.
//! * [`frames`]: Gabor, wavelet, exponential and sinc-kernel frame models.
//! * [`selector`]: pairings, the selector constant and binary selection.
//! * [`discretize`]: the sampling, distinct-selection and separation pipeline.
//! * [`constants`]: closed-form constant accounting in log₂ space.

#![no_std]
// NaN-rejecting range checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod constants;
pub mod discretize;
pub mod frames;
pub mod operators;
pub mod rng;
pub mod selector;
pub mod spaces;

use alloc::string::String;

pub use num_complex::Complex64;

/// Complex column vector used for frame elements.
pub type CVector = nalgebra::DVector<Complex64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("non-finite entry in operator")]
    NonFinite,
    #[error("operator is not positive semi-definite (min eigenvalue {min_eig:e})")]
    NotPositive { min_eig: f64 },
    #[error("eigen-solver did not converge")]
    NoConvergence,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("search is infeasible: {0}")]
    Infeasible(String),
    #[error("point {index} lies farther than 2r from every center")]
    Uncovered { index: usize },
    #[error("declared norm bound {declared} exceeded by {observed}")]
    NormBoundExceeded { declared: f64, observed: f64 },
    #[error("frame is degenerate: lower bound {lower} does not exceed deviation target {target}")]
    Degenerate { lower: f64, target: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
