use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CurvatureProfile, ProfileKind};
use crate::error::{Error, Result};
use crate::RealMatrix;

/// Shape limits for random trigonometric profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomProfileSpec {
    pub max_n: usize,
    pub max_degree: usize,
    pub max_length: f64,
    /// Bound on `‖R(t)‖₂` over all `t`.
    pub spectral_bound: f64,
}

impl Default for RandomProfileSpec {
    fn default() -> Self {
        RandomProfileSpec {
            max_n: 4,
            max_degree: 3,
            max_length: 6.0,
            spectral_bound: 10.0,
        }
    }
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
    let m = RealMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.symmetrized()
}

/// A random trigonometric-polynomial profile on `[0, L]`, reproducible from
/// `seed`. The coefficients are scaled so that
/// `‖C‖_F + Σ (‖A_k‖_F + ‖B_k‖_F) ≤ spectral_bound`, which keeps the
/// spectrum of every `R(t)` inside `[-bound, bound]`.
pub fn random_trigonometric_profile(seed: u64, spec: &RandomProfileSpec) -> Result<CurvatureProfile> {
    if spec.max_n == 0 || spec.max_degree == 0 || !(spec.max_length >= 1.0) || !(spec.spectral_bound > 0.0) {
        return Err(Error::InvalidInput("random profile limits must be positive (length at least 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=spec.max_n);
    let degree = rng.gen_range(1..=spec.max_degree);
    let length = rng.gen_range(1.0..=spec.max_length);
    let omega = TAU / length * rng.gen_range(0.5..1.5);

    // a negative shift so that conjugate points are common
    let shift = rng.gen_range(0.0..0.8);
    let mut constant = random_sym(&mut rng, n);
    for i in 0..n {
        constant[(i, i)] -= shift * 3.0;
    }
    let cos: Vec<RealMatrix> = (0..degree).map(|_| random_sym(&mut rng, n)).collect();
    let sin: Vec<RealMatrix> = (0..degree).map(|_| random_sym(&mut rng, n)).collect();

    let total = constant.norm_fro() + cos.iter().chain(&sin).map(RealMatrix::norm_fro).sum::<f64>();
    let target = spec.spectral_bound * rng.gen_range(0.2..1.0);
    let scale = if total > 0.0 { target / total } else { 1.0 };
    CurvatureProfile::new(
        n,
        0.0,
        length,
        ProfileKind::Trigonometric {
            omega,
            constant: constant.scale(scale),
            cos: cos.iter().map(|m| m.scale(scale)).collect(),
            sin: sin.iter().map(|m| m.scale(scale)).collect(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::sym_eig;

    #[test]
    fn reproducible_and_bounded() {
        let spec = RandomProfileSpec::default();
        for seed in 0..10 {
            let p = random_trigonometric_profile(seed, &spec).unwrap();
            let q = random_trigonometric_profile(seed, &spec).unwrap();
            assert_eq!(p.eval(0.7).unwrap(), q.eval(0.7).unwrap());
            assert!(p.n() <= 4 && p.len() <= 6.0);
            for i in 0..=50 {
                let t = p.len() * i as f64 / 50.0;
                let e = sym_eig(&p.eval(t).unwrap()).unwrap().values;
                assert!(e.iter().all(|x| x.abs() <= 10.0));
            }
        }
    }
}
