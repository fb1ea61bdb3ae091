use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Spectrum<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> Spectrum<T> {
    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * self.values[k] * v[(j, k)]).sum()
        })
    }

    pub fn count_negative(&self, threshold: T) -> usize {
        self.values.iter().filter(|&&x| x < -threshold).count()
    }
}

pub(crate) fn symmetry_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(16.0))
}

/// Full eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eig<T: Real>(a: &Matrix<T>) -> Result<Spectrum<T>> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "sym_eig needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite entry".into()));
    }
    let scale = a.norm_max().max(T::one());
    if a.asymmetry() > symmetry_tolerance::<T>() * scale {
        return Err(Error::InvalidInput(
            "sym_eig needs a symmetric matrix".into(),
        ));
    }
    Ok(jacobi(a.symmetrized()))
}

fn off_diagonal_norm<T: Real>(a: &Matrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn jacobi<T: Real>(mut a: Matrix<T>) -> Spectrum<T> {
    let n = a.rows();
    let mut v = Matrix::identity(n);
    let target = a.norm_fro() * T::lit(1e-14).max(T::epsilon());
    let two = T::lit(2.0);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Skip rotations that cannot change the diagonal in this precision.
                if apq.abs() <= T::epsilon() * T::lit(0.01) * (app.abs() + aqq.abs()) {
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Spectrum { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_matrix_sorted() {
        let s = sym_eig(&Matrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn swap_matrix() {
        let a = Matrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = sym_eig(&a).unwrap();
        assert!((s.values[0] + 1.0).abs() < 1e-15);
        assert!((s.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_2x2_matches_quadratic_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (p, q, r): (f64, f64, f64) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let a = Matrix::from_rows(&[vec![p, q], vec![q, r]]).unwrap();
            // roots of x² - (p + r)x + (pr - q²)
            let tr = p + r;
            let disc = ((p - r) * (p - r) + 4.0 * q * q).sqrt();
            let expect = [(tr - disc) / 2.0, (tr + disc) / 2.0];
            let s = sym_eig(&a).unwrap();
            for (got, want) in s.values.iter().zip(expect) {
                assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn rejects_asymmetric_and_rectangular() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::InvalidInput(_))));
        assert!(sym_eig(&Matrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = sym_eig(&a).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-6);
        assert!((s.values[1] - 3.0).abs() < 1e-6);
    }
}
