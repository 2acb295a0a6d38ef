use thiserror::Error;

use crate::secular::ModeIndex;

/// Errors raised by the secular solver and everything layered on it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    #[error("invalid Robin parameter sigma = {0} (must be finite and >= 0)")]
    InvalidSigma(f64),

    #[error("invalid tolerance {tol} (admissible range [{lo}, {hi}])")]
    InvalidTolerance { tol: f64, lo: f64, hi: f64 },

    #[error("invalid mode ({m}, {n}): need 0 <= m <= n")]
    InvalidMode { m: i64, n: i64 },

    #[error(
        "no convergence for mode {mode} at sigma = {sigma} after {iterations} iterations \
         (best iterate L = {best:?}, residual = {residual:e})"
    )]
    NonConvergence {
        mode: ModeIndex,
        sigma: f64,
        iterations: usize,
        best: [f64; 3],
        residual: f64,
    },

    #[error("Jacobian singular for mode {mode} at sigma = {sigma}: an angle reached pi/2")]
    Singularity { mode: ModeIndex, sigma: f64 },
}

/// Errors raised by the spectrum, statistics and I/O layers.
#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Solve(#[from] SolveError),

    #[error("energy cutoff {0} admits no modes")]
    CutoffTooSmall(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cache I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed cache record on line {line}: {reason}")]
    CacheFormat { line: usize, reason: String },
}

/// Errors for closed-form evaluations outside their domain.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum DomainError {
    #[error("F_R is undefined for m = 0 (mode ({m}, {n}))")]
    ZeroIndex { m: i64, n: i64 },

    #[error("argument {0} outside (0, 1/sqrt(3)]")]
    ProfileArgument(f64),

    #[error("point ({x}, {y}) lies outside the triangle")]
    OutsideDomain { x: f64, y: f64 },

    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// Errors from the finite-difference derivative checks.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum DerivativeError {
    #[error(transparent)]
    Solve(#[from] SolveError),

    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error(
        "finite differences for {quantity} are inconsistent under step halving \
         (step {step:e}, relative spread {spread:e})"
    )]
    StepTooSmall {
        quantity: String,
        step: f64,
        spread: f64,
    },
}

/// Errors from the number-theory routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LoeschianError {
    #[error("sieve limit {limit} exceeds the maximum {max}")]
    LimitTooLarge { limit: u64, max: u64 },

    #[error("CRT modulus for K = {k} overflows {width}-bit arithmetic")]
    ArithmeticOverflow { k: usize, width: u32 },

    #[error("K must be >= 1")]
    EmptyWindow,
}
