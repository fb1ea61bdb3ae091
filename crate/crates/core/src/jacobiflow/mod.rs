//! Curvature profiles and the `λ`-Jacobi flow `Y' = A(t, λ) Y` that carries
//! `σ` to the Lagrangian curves `σ_λ(t)`.

mod flow;
mod profile;
mod random;

pub use flow::{
    coefficient, fundamental_solution, integrate_frame, integrate_frame_with_drift, lambda_lower_bound,
    sigma_lambda, sigma_lambda_sweep, symplectic_residual, DriftMonitor, FlowPlan, FlowSettings,
    FundamentalSolution,
};
pub use profile::{CurvatureProfile, ProfileKind};
pub use random::{random_trigonometric_profile, RandomProfileSpec};
