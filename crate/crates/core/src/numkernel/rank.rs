use super::{sym_eig, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Numerical rank of a matrix together with an orthonormal basis of its kernel.
#[derive(Clone, Debug)]
pub struct RankKernel<T> {
    pub rank: usize,
    /// Singular values, descending.
    pub singular_values: Vec<T>,
    /// `cols x (cols - rank)` matrix with orthonormal columns spanning the kernel.
    pub kernel: Matrix<T>,
}

impl<T: Real> RankKernel<T> {
    pub fn nullity(&self) -> usize {
        self.kernel.cols()
    }
}

/// Right singular vectors and singular values, descending.
///
/// The right singular vectors come from the eigenvectors of `MᵀM`; each
/// singular value is then re-measured as `‖M v‖`, which keeps small singular
/// values accurate to roundoff in `M` rather than to its square root.
pub fn singular_pairs<T: Real>(m: &Matrix<T>) -> (Vec<T>, Matrix<T>) {
    let gram = m.tr_mul(m).symmetrized();
    let spec = sym_eig(&gram).expect("Gram matrix is symmetric");
    let cols = m.cols();
    let mut pairs: Vec<(T, usize)> = (0..cols)
        .map(|j| {
            let v = spec.vectors.column(j);
            let mv = m.mul_vec(&v);
            (mv.iter().map(|&x| x * x).sum::<T>().sqrt(), j)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite singular values").then(x.1.cmp(&y.1)));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = Matrix::from_fn(cols, cols, |i, j| spec.vectors[(i, pairs[j].1)]);
    (values, vectors)
}

pub fn singular_values<T: Real>(m: &Matrix<T>) -> Vec<T> {
    singular_pairs(m).0
}

/// Rank with the threshold `tol · σ_max`.
pub fn rank_kernel<T: Real>(m: &Matrix<T>, tol: T) -> Result<RankKernel<T>> {
    if !(tol > T::zero() && tol < T::one()) {
        return Err(Error::InvalidInput(format!("rank tolerance {tol} not in (0, 1)")));
    }
    let (values, vectors) = singular_pairs(m);
    let largest = values.first().copied().unwrap_or_else(T::zero);
    Ok(split(values, vectors, tol * largest))
}

/// Rank with an absolute threshold: singular values `> threshold` count.
pub fn rank_kernel_abs<T: Real>(m: &Matrix<T>, threshold: T) -> RankKernel<T> {
    let (values, vectors) = singular_pairs(m);
    split(values, vectors, threshold)
}

fn split<T: Real>(values: Vec<T>, vectors: Matrix<T>, threshold: T) -> RankKernel<T> {
    let rank = values.iter().filter(|&&s| s > threshold).count();
    let cols = vectors.cols();
    let kernel_cols: Vec<usize> = (rank..cols).collect();
    let all_rows: Vec<usize> = (0..vectors.rows()).collect();
    RankKernel {
        rank,
        singular_values: values,
        kernel: vectors.select(&all_rows, &kernel_cols),
    }
}
