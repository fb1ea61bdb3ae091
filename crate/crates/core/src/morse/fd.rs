use crate::error::{Error, Result};
use crate::jacobiflow::CurvatureProfile;
use crate::numkernel::{sym_eig, BlockTridiag};
use crate::RealMatrix;

/// Smallest mesh accepted by the discretizations.
pub const MIN_MESH: usize = 8;

fn check_mesh(mesh: usize) -> Result<()> {
    if mesh < MIN_MESH {
        return Err(Error::InvalidInput(format!("mesh {mesh} is below the minimum of {MIN_MESH}")));
    }
    Ok(())
}

/// Three-point second-difference matrix of `-X'' + R(t) X` on the interior
/// nodes `tᵢ = a + i·h`, `i = 1..m-1`, with Dirichlet ends.
pub fn sl_matrix_fd(profile: &CurvatureProfile, mesh: usize) -> Result<BlockTridiag<f64>> {
    check_mesh(mesh)?;
    let n = profile.n();
    let h = profile.len() / mesh as f64;
    let inv_h2 = 1.0 / (h * h);
    let eye = RealMatrix::identity(n);
    let diag = (1..mesh)
        .map(|i| Ok(&eye.scale(2.0 * inv_h2) + &profile.eval(profile.a() + h * i as f64)?))
        .collect::<Result<Vec<_>>>()?;
    let off = vec![eye.scale(-inv_h2); mesh - 2];
    BlockTridiag::new(diag, off)
}

/// Full spectrum (ascending) of the finite-difference Dirichlet problem.
/// Dense: intended for meshes up to a few hundred nodes.
pub fn sl_eigs_fd(profile: &CurvatureProfile, mesh: usize) -> Result<Vec<f64>> {
    Ok(sym_eig(&sl_matrix_fd(profile, mesh)?.to_dense())?.values)
}

/// Finite-difference eigenvalues strictly below `upper`, located by inertia
/// bisection; usable at fine meshes.
pub fn sl_eigs_fd_below(profile: &CurvatureProfile, mesh: usize, upper: f64) -> Result<Vec<f64>> {
    Ok(sl_matrix_fd(profile, mesh)?.eigenvalues_below(upper))
}

/// Piecewise-linear Galerkin matrix of the index form
/// `∫ ⟨X', Y'⟩ + ⟨R X, Y⟩` on `m` uniform elements, with `R` sampled at
/// element midpoints and the consistent element mass `h/6 [[2, 1], [1, 2]]`.
pub fn hessian_matrix_fd(profile: &CurvatureProfile, mesh: usize) -> Result<BlockTridiag<f64>> {
    check_mesh(mesh)?;
    let n = profile.n();
    let h = profile.len() / mesh as f64;
    let eye = RealMatrix::identity(n);
    let mids = (0..mesh)
        .map(|e| profile.eval(profile.a() + h * (e as f64 + 0.5)))
        .collect::<Result<Vec<_>>>()?;
    // interior node i sits between elements i-1 and i
    let diag = (1..mesh)
        .map(|i| &eye.scale(2.0 / h) + &(&mids[i - 1] + &mids[i]).scale(h / 3.0))
        .collect();
    let off = (1..mesh - 1)
        .map(|i| &eye.scale(-1.0 / h) + &mids[i].scale(h / 6.0))
        .collect();
    BlockTridiag::new(diag, off)
}

/// Number of negative eigenvalues of the discretized index form.
pub fn hessian_index_fd(profile: &CurvatureProfile, mesh: usize) -> Result<usize> {
    Ok(hessian_matrix_fd(profile, mesh)?.count_below(0.0))
}
