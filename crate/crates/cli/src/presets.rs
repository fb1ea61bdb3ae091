use std::f64::consts::PI;

use serde::Serialize;

use maslov_core::jacobiflow::{random_trigonometric_profile, ProfileKind, RandomProfileSpec};
use maslov_core::RealMatrix;

/// Counts every method should report for a preset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub conjugate_total: usize,
    pub spectral_total: usize,
    pub hessian_index: usize,
}

const fn all(k: usize) -> Option<Expected> {
    Some(Expected {
        conjugate_total: k,
        spectral_total: k,
        hessian_index: k,
    })
}

/// Profile payload of a preset.
#[derive(Clone, Debug)]
pub struct PresetProfile {
    pub n: usize,
    pub interval: [f64; 2],
    pub kind: ProfileKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct Preset {
    pub name: &'static str,
    /// Where the expected counts come from.
    pub note: &'static str,
    pub expected: Option<Expected>,
    #[serde(skip)]
    build: fn(u64) -> Result<PresetProfile, String>,
}

impl Preset {
    pub fn build(&self, seed: u64) -> Result<PresetProfile, String> {
        (self.build)(seed)
    }
}

fn diagonal(diag: &[f64], a: f64, b: f64) -> Result<PresetProfile, String> {
    Ok(PresetProfile {
        n: diag.len(),
        interval: [a, b],
        kind: ProfileKind::DiagonalConstant { diag: diag.to_vec() },
    })
}

fn scalar(r: f64) -> RealMatrix {
    RealMatrix::from_diagonal(&[r])
}

pub fn catalog() -> Vec<Preset> {
    vec![
        Preset {
            name: "flat",
            note: "R = 0 on [0, 1]: Jacobi fields are linear; Dirichlet eigenvalues (kπ)² are positive",
            expected: all(0),
            build: |_| diagonal(&[0.0], 0.0, 1.0),
        },
        Preset {
            name: "hyperbolic",
            note: "R = +1 on [0, 1]: X = sinh t never vanishes again",
            expected: all(0),
            build: |_| diagonal(&[1.0], 0.0, 1.0),
        },
        Preset {
            name: "sphere-n1",
            note: "R = -1 on [0, 10]: X = sin t vanishes at π, 2π, 3π; eigenvalues (kπ/10)² - 1",
            expected: all(3),
            build: |_| diagonal(&[-1.0], 0.0, 10.0),
        },
        Preset {
            name: "sphere-like-n2",
            note: "R = -I₂ on [0, 4]: both fields sin t vanish together at π",
            expected: all(2),
            build: |_| {
                Ok(PresetProfile {
                    n: 2,
                    interval: [0.0, 4.0],
                    kind: ProfileKind::Constant {
                        r: RealMatrix::identity(2).scale(-1.0),
                    },
                })
            },
        },
        Preset {
            name: "two-scale",
            note: "R = diag(-1, -4) on [0, 4]: sin t and sin 2t; zeros π/2 (simple) and π (double)",
            expected: all(3),
            build: |_| diagonal(&[-1.0, -4.0], 0.0, 4.0),
        },
        Preset {
            name: "deep-well",
            note: "R = -50 on [0, 1]: eigenvalues k²π² - 50 are negative for k = 1, 2",
            expected: all(2),
            build: |_| diagonal(&[-50.0], 0.0, 1.0),
        },
        Preset {
            name: "conjugate-endpoint",
            note: "R = -1 on [0, π]: b itself is conjugate (nullity 1) and is not counted",
            expected: all(0),
            build: |_| diagonal(&[-1.0], 0.0, PI),
        },
        Preset {
            name: "piecewise-kick",
            note: "R = 0, -4, 0 on [0, 1), [1, 3), [3, 4]: X = t, then cos 2s + ½ sin 2s vanishes once near t = 2.017",
            expected: all(1),
            build: |_| {
                Ok(PresetProfile {
                    n: 1,
                    interval: [0.0, 4.0],
                    kind: ProfileKind::PiecewiseConstant {
                        breakpoints: vec![1.0, 3.0],
                        pieces: vec![scalar(0.0), scalar(-4.0), scalar(0.0)],
                    },
                })
            },
        },
        Preset {
            name: "random-trig",
            note: "random trigonometric polynomial from settings.seed (n ≤ 4, degree ≤ 3, |spectrum| ≤ 10, length ≤ 6)",
            expected: None,
            build: |seed| {
                let p = random_trigonometric_profile(seed, &RandomProfileSpec::default()).map_err(|e| e.to_string())?;
                Ok(PresetProfile {
                    n: p.n(),
                    interval: [p.a(), p.b()],
                    kind: p.kind().clone(),
                })
            },
        },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    catalog().into_iter().find(|p| p.name == name)
}
