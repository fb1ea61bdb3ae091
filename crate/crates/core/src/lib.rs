//! Morse index of a geodesic from its curvature operator `R(t)`, written in
//! a parallel orthonormal frame, computed three independent ways:
//!
//! * counting conjugate points as crossings of the Lagrangian curve
//!   `σ₀(t)` with the train of `σ = {0} x Rⁿ` ([`morse::conjugate_points`]);
//! * counting negative Dirichlet eigenvalues of `-X'' + R X = λX` as
//!   crossings of `λ ↦ σ_λ(b)` ([`morse::spectral_count`]);
//! * the negative inertia of a finite-element discretization of the index
//!   form ([`morse::hessian_index_fd`]).
//!
//! The first two are tied together by the vanishing intersection number of
//! a contractible loop in the Lagrangian Grassmannian ([`morse::rectangle_check`]),
//! which is cross-checked against the winding number of `Det²` along the
//! same loop.
//!
//! Sign convention: the Jacobi equation is `X'' = (R(t) - λ) X`, so conjugate
//! points appear where `R` is negative definite. The round unit sphere
//! corresponds to `R ≡ -I`.

pub mod error;
pub mod jacobiflow;
pub mod lagrangian;
pub mod maslov;
pub mod morse;
pub mod numkernel;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Real matrix used by the geometric layers.
pub type RealMatrix = numkernel::Matrix<f64>;
/// Complex square matrix used for `Det²`.
pub type ComplexMatrix = numkernel::CMatrix<f64>;
/// Symmetric eigen-decomposition in double precision.
pub type SymSpectrum = numkernel::Spectrum<f64>;

pub type RealMatrix32 = numkernel::Matrix<f32>;
pub type SymSpectrum32 = numkernel::Spectrum<f32>;
