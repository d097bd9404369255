//! Numerical laboratory for weighted Littlewood-Paley theory on a periodic grid.
//!
//! The library models the real line as a torus of period `L` sampled at `n`
//! points, so that spectral projections are exact and Plancherel holds to
//! rounding error. On top of that discretization it provides:
//!
//! - [`lattice`]: grids, DFTs, frequency-interval algebra, dyadic and Whitney
//!   decompositions of the frequency axis;
//! - [`weights`]: Muckenhoupt A_p and reverse-Holder constants, weighted and
//!   weak-type norms, decreasing rearrangements;
//! - [`variation`]: q-variation of multiplier symbols and the constructive
//!   step-atom decomposition of bounded-variation symbols;
//! - [`operators`]: Fourier multipliers, spectral projections, the square
//!   functions built from interval families, and smooth variants;
//! - [`maximal`]: Hardy-Littlewood and sharp maximal operators, operator-norm
//!   probes, and the iterated-maximal majorant construction;
//! - [`lab`]: seeded, reproducible verification experiments with JSON reports,
//!   driven by the `lab` CLI binary.

pub mod lattice;
pub mod weights;
pub mod variation;
pub mod operators;
pub mod maximal;
pub mod lab;

pub use rustfft::num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("interval contains {0} grid samples, need at least {1}")]
    TooFewSamples(usize, usize),
    #[error("operator requires a real-valued signal")]
    NonRealInput,
    #[error("operator requires a nonnegative signal")]
    NegativeInput,
    #[error("majorant is numerically zero; cannot divide")]
    ZeroMajorant,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("report error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
