//! Small dense linear algebra sized for `n ≤ 32`: symmetric eigensolver,
//! rank and kernel detection, complex determinants and real linear solves.
//!
//! Everything here is generic over [`Real`](crate::Real) so the same kernel
//! runs in `f32` or `f64`; the geometric layers above it use `f64`.

mod banded;
mod complex;
mod eig;
mod matrix;
mod rank;
mod solve;

pub use banded::BlockTridiag;
pub use complex::{complex_det, complex_solve, CMatrix};
pub use eig::{sym_eig, Spectrum};
pub use matrix::Matrix;
pub use rank::{rank_kernel, rank_kernel_abs, singular_pairs, singular_values, RankKernel};
pub use solve::{determinant, solve_linear, Lu};

/// Default relative rank threshold.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
