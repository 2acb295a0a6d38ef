//! Robin eigenvalues of the equilateral triangle.
//!
//! Each eigenvalue branch `Λ_{m,n}(σ)` is obtained from three coupled
//! secular equations in auxiliary angles `(L, M, N)`. On top of the solver
//! the crate builds ordered spectra, Robin–Neumann gap and spacing
//! statistics, small-`σ` asymptotics, the number theory of `m² + mn + n²`,
//! and the closed-form Neumann eigenfunctions.
//!
//! The numerical core is generic over [`Scalar`] (`f32`, `f64`); the
//! spectrum, statistics and cache layers work in `f64`.

pub mod asymptotics;
pub mod eigenfunctions;
pub mod error;
pub mod geometry;
pub mod loeschian;
pub mod scalar;
pub mod secular;
pub mod spectrum;
pub mod stats;

pub use error::{DerivativeError, DomainError, LoeschianError, SolveError, SpectrumError};
pub use geometry::{make_geometry, TriangleGeometry};
pub use scalar::Scalar;
pub use secular::{solve_secular, ModeIndex, SecularSolution, SolveMethod, DEFAULT_TOL};
pub use spectrum::{eigenvalue, enumerate_spectrum, EigenvalueRecord, SpectrumTable};

pub type Geometry = TriangleGeometry<f64>;
pub type Solution = SecularSolution<f64>;
pub type Record = EigenvalueRecord<f64>;
pub type Coefficients = asymptotics::ExpansionCoefficients<f64>;
pub type Geometry32 = TriangleGeometry<f32>;
pub type Solution32 = SecularSolution<f32>;
