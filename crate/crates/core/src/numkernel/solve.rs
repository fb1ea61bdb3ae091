use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// LU factorization with partial pivoting, `P A = L U` packed in one matrix.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Factors `a`, reporting [`Error::Singular`] when a pivot falls below
    /// `n · ε · ‖A‖` or the 1-norm condition estimate exceeds `1 / (100 ε)`.
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.norm_max();
        if n > 0 && scale == T::zero() {
            return Err(Error::Singular);
        }
        let floor = T::epsilon() * T::lit(n.max(1) as f64) * scale;
        for col in 0..n {
            let mut pivot = col;
            for i in (col + 1)..n {
                if lu[(i, col)].abs() > lu[(pivot, col)].abs() {
                    pivot = i;
                }
            }
            if lu[(pivot, col)].abs() <= floor {
                return Err(Error::Singular);
            }
            if pivot != col {
                perm.swap(pivot, col);
                for j in 0..n {
                    let tmp = lu[(pivot, j)];
                    lu[(pivot, j)] = lu[(col, j)];
                    lu[(col, j)] = tmp;
                }
            }
            let p = lu[(col, col)];
            for i in (col + 1)..n {
                let f = lu[(i, col)] / p;
                lu[(i, col)] = f;
                for j in (col + 1)..n {
                    let v = lu[(col, j)];
                    lu[(i, j)] = lu[(i, j)] - f * v;
                }
            }
        }
        let out = Lu { lu, perm };
        if n > 0 {
            let inv = out.solve(&Matrix::identity(n));
            let cond = one_norm(a) * one_norm(&inv);
            if !cond.is_finite() || cond * T::lit(100.0) * T::epsilon() >= T::one() {
                return Err(Error::Singular);
            }
        }
        Ok(out)
    }

    pub fn solve(&self, b: &Matrix<T>) -> Matrix<T> {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n, "right-hand side row mismatch");
        let m = b.cols();
        let mut x = Matrix::from_fn(n, m, |i, j| b[(self.perm[i], j)]);
        for i in 0..n {
            for k in 0..i {
                let f = self.lu[(i, k)];
                if f != T::zero() {
                    for j in 0..m {
                        let v = x[(k, j)];
                        x[(i, j)] = x[(i, j)] - f * v;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let f = self.lu[(i, k)];
                if f != T::zero() {
                    for j in 0..m {
                        let v = x[(k, j)];
                        x[(i, j)] = x[(i, j)] - f * v;
                    }
                }
            }
            let p = self.lu[(i, i)];
            for j in 0..m {
                x[(i, j)] = x[(i, j)] / p;
            }
        }
        x
    }
}

fn one_norm<T: Real>(a: &Matrix<T>) -> T {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)].abs()).sum::<T>())
        .fold(T::zero(), T::max)
}

/// Determinant by Gaussian elimination with partial pivoting. Never fails;
/// an exactly singular matrix gives zero.
pub fn determinant<T: Real>(a: &Matrix<T>) -> T {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut det = T::one();
    for col in 0..n {
        let mut pivot = col;
        for i in (col + 1)..n {
            if m[(i, col)].abs() > m[(pivot, col)].abs() {
                pivot = i;
            }
        }
        let p = m[(pivot, col)];
        if p == T::zero() {
            return T::zero();
        }
        if pivot != col {
            det = -det;
            for j in 0..n {
                let tmp = m[(pivot, j)];
                m[(pivot, j)] = m[(col, j)];
                m[(col, j)] = tmp;
            }
        }
        det = det * p;
        for i in (col + 1)..n {
            let f = m[(i, col)] / p;
            for j in (col + 1)..n {
                let v = m[(col, j)];
                m[(i, j)] = m[(i, j)] - f * v;
            }
        }
    }
    det
}

/// Solves `A X = B`.
pub fn solve_linear<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if b.rows() != a.rows() {
        return Err(Error::InvalidInput("right-hand side row mismatch".into()));
    }
    Ok(Lu::new(a)?.solve(b))
}
