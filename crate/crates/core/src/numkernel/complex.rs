use std::ops::{Index, IndexMut};

use num_complex::Complex;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// `re + i·im` from two real square matrices of equal size.
    pub fn from_parts(re: &Matrix<T>, im: &Matrix<T>) -> Result<Self> {
        if !re.is_square() || re.rows() != im.rows() || re.cols() != im.cols() {
            return Err(Error::InvalidInput("complex parts must be equal square matrices".into()));
        }
        let n = re.rows();
        let data = re
            .as_slice()
            .iter()
            .zip(im.as_slice())
            .map(|(&a, &b)| Complex::new(a, b))
            .collect();
        Ok(CMatrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matmul(&self, rhs: &CMatrix<T>) -> Self {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        Self::from_fn(n, |i, j| {
            (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                acc + self[(i, k)] * rhs[(k, j)]
            })
        })
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn complex_det<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    let n = m.n;
    let mut a = m.clone();
    let mut det = Complex::new(T::one(), T::zero());
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].norm().partial_cmp(&a[(j, col)].norm()).expect("finite"))
            .expect("non-empty range");
        if a[(pivot, col)].norm() == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        if pivot != col {
            for j in 0..n {
                a.data.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        let p = a[(col, col)];
        det = det * p;
        for i in (col + 1)..n {
            let f = a[(i, col)] / p;
            if f.norm() == T::zero() {
                continue;
            }
            for j in col..n {
                let v = a[(col, j)];
                a[(i, j)] = a[(i, j)] - f * v;
            }
        }
    }
    det
}

/// Solves `A X = B` for complex square `A`.
pub fn complex_solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.n;
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = lu.data.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].norm().partial_cmp(&lu[(j, col)].norm()).expect("finite"))
            .expect("non-empty range");
        if lu[(pivot, col)].norm() <= T::epsilon() * T::lit(n as f64) * scale {
            return Err(Error::Singular);
        }
        if pivot != col {
            for j in 0..n {
                lu.data.swap(pivot * n + j, col * n + j);
                x.data.swap(pivot * n + j, col * n + j);
            }
        }
        let p = lu[(col, col)];
        for i in (col + 1)..n {
            let f = lu[(i, col)] / p;
            for j in col..n {
                let v = lu[(col, j)];
                lu[(i, j)] = lu[(i, j)] - f * v;
            }
            for j in 0..n {
                let v = x[(col, j)];
                x[(i, j)] = x[(i, j)] - f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let p = lu[(col, col)];
        for j in 0..n {
            let mut s = x[(col, j)];
            for k in (col + 1)..n {
                s = s - lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = s / p;
        }
    }
    Ok(x)
}
