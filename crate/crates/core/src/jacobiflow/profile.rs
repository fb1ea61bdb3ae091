use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::sym_eig;
use crate::RealMatrix;

const SYMMETRY_TOL: f64 = 1e-12;

/// How `R(t)` is represented.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileKind {
    Constant { r: RealMatrix },
    DiagonalConstant { diag: Vec<f64> },
    /// `pieces[i]` holds on `[breakpoints[i-1], breakpoints[i])`, with the
    /// outer pieces extending to the interval ends.
    PiecewiseConstant { breakpoints: Vec<f64>, pieces: Vec<RealMatrix> },
    /// `R(t) = Σ_k coeffs[k] · t^k`.
    PolynomialEntries { coeffs: Vec<RealMatrix> },
    /// Linear interpolation between `values[i]` at `times[i]`.
    SampledLinearInterp { times: Vec<f64>, values: Vec<RealMatrix> },
    /// `R(t) = C + Σ_k (A_k cos(kωt) + B_k sin(kωt))`, `k = 1..`.
    Trigonometric {
        omega: f64,
        constant: RealMatrix,
        cos: Vec<RealMatrix>,
        sin: Vec<RealMatrix>,
    },
}

/// The curve `t ↦ R(t)` of symmetric `n x n` matrices on `[a, b]`.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureProfile {
    n: usize,
    a: f64,
    b: f64,
    kind: ProfileKind,
    #[serde(skip)]
    breaks: Vec<f64>,
}

fn checked_sym(m: &RealMatrix, n: usize, what: &str) -> Result<RealMatrix> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::InvalidInput(format!(
            "{what}: expected {n}x{n}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput(format!("{what}: non-finite entry")));
    }
    if m.asymmetry() > SYMMETRY_TOL * m.norm_max().max(1.0) {
        return Err(Error::InvalidInput(format!("{what}: matrix is not symmetric")));
    }
    Ok(m.symmetrized())
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite())
}

impl CurvatureProfile {
    pub fn new(n: usize, a: f64, b: f64, kind: ProfileKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("dimension n must be at least 1".into()));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput(format!("interval [{a}, {b}] must satisfy a < b")));
        }
        let kind = match kind {
            ProfileKind::Constant { r } => ProfileKind::Constant {
                r: checked_sym(&r, n, "constant profile")?,
            },
            ProfileKind::DiagonalConstant { diag } => {
                if diag.len() != n || diag.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput(format!("diagonal profile needs {n} finite entries")));
                }
                ProfileKind::DiagonalConstant { diag }
            }
            ProfileKind::PiecewiseConstant { breakpoints, pieces } => {
                if pieces.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidInput("piecewise profile needs one more piece than breakpoints".into()));
                }
                if !strictly_increasing(&breakpoints) {
                    return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
                }
                let pieces = pieces
                    .iter()
                    .map(|p| checked_sym(p, n, "piecewise profile"))
                    .collect::<Result<_>>()?;
                ProfileKind::PiecewiseConstant { breakpoints, pieces }
            }
            ProfileKind::PolynomialEntries { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::InvalidInput("polynomial profile needs coefficients".into()));
                }
                let coeffs = coeffs
                    .iter()
                    .map(|c| checked_sym(c, n, "polynomial profile"))
                    .collect::<Result<_>>()?;
                ProfileKind::PolynomialEntries { coeffs }
            }
            ProfileKind::SampledLinearInterp { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::InvalidInput("sampled profile needs at least two (time, matrix) samples".into()));
                }
                if !strictly_increasing(&times) {
                    return Err(Error::InvalidInput("sample times must be strictly increasing".into()));
                }
                if times[0] > a || *times.last().unwrap() < b {
                    return Err(Error::InvalidInput("samples must cover the interval".into()));
                }
                let values = values
                    .iter()
                    .map(|v| checked_sym(v, n, "sampled profile"))
                    .collect::<Result<_>>()?;
                ProfileKind::SampledLinearInterp { times, values }
            }
            ProfileKind::Trigonometric { omega, constant, cos, sin } => {
                if !omega.is_finite() || cos.len() != sin.len() {
                    return Err(Error::InvalidInput("trigonometric profile needs finite ω and matching cos/sin terms".into()));
                }
                let sym = |v: &Vec<RealMatrix>| -> Result<Vec<RealMatrix>> {
                    v.iter().map(|m| checked_sym(m, n, "trigonometric profile")).collect()
                };
                ProfileKind::Trigonometric {
                    omega,
                    constant: checked_sym(&constant, n, "trigonometric profile")?,
                    cos: sym(&cos)?,
                    sin: sym(&sin)?,
                }
            }
        };
        let breaks = match &kind {
            ProfileKind::PiecewiseConstant { breakpoints, .. } => breakpoints.clone(),
            ProfileKind::SampledLinearInterp { times, .. } => times.clone(),
            _ => Vec::new(),
        }
        .into_iter()
        .filter(|&t| t > a && t < b)
        .collect();
        Ok(CurvatureProfile { n, a, b, kind, breaks })
    }

    pub fn constant(r: RealMatrix, a: f64, b: f64) -> Result<Self> {
        Self::new(r.rows(), a, b, ProfileKind::Constant { r })
    }

    pub fn diagonal(diag: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        Self::new(diag.len(), a, b, ProfileKind::DiagonalConstant { diag })
    }

    /// Same curvature on a different interval.
    pub fn with_interval(&self, a: f64, b: f64) -> Result<Self> {
        Self::new(self.n, a, b, self.kind.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    /// Interior points where `R` may fail to be smooth.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub(crate) fn domain_check(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * (1.0 + self.a.abs().max(self.b.abs()));
        if t.is_finite() && t >= self.a - slack && t <= self.b + slack {
            Ok(())
        } else {
            Err(Error::Domain { t, a: self.a, b: self.b })
        }
    }

    /// Index of the smooth segment containing `t` (right-continuous).
    pub(crate) fn segment_of(&self, t: f64) -> usize {
        self.breaks.partition_point(|&x| x <= t)
    }

    pub fn eval(&self, t: f64) -> Result<RealMatrix> {
        self.domain_check(t)?;
        let mut out = RealMatrix::zeros(self.n, self.n);
        self.eval_into(t, self.segment_of(t), out.as_mut_slice());
        Ok(out)
    }

    /// Writes `R(t)` row-major into `out`. For piecewise kinds `segment`
    /// selects the piece, so values at a breakpoint can be taken from either
    /// side.
    pub(crate) fn eval_into(&self, t: f64, segment: usize, out: &mut [f64]) {
        let n = self.n;
        match &self.kind {
            ProfileKind::Constant { r } => out.copy_from_slice(r.as_slice()),
            ProfileKind::DiagonalConstant { diag } => {
                out.fill(0.0);
                for (i, d) in diag.iter().enumerate() {
                    out[i * n + i] = *d;
                }
            }
            ProfileKind::PiecewiseConstant { breakpoints, pieces } => {
                // segments are counted over interior breakpoints only
                let first_interior = breakpoints.partition_point(|&x| x <= self.a);
                let idx = (first_interior + segment).min(pieces.len() - 1);
                out.copy_from_slice(pieces[idx].as_slice());
            }
            ProfileKind::PolynomialEntries { coeffs } => {
                out.fill(0.0);
                // Horner
                for c in coeffs.iter().rev() {
                    for (o, &x) in out.iter_mut().zip(c.as_slice()) {
                        *o = *o * t + x;
                    }
                }
            }
            ProfileKind::SampledLinearInterp { times, values } => {
                let first_interior = times.partition_point(|&x| x <= self.a);
                // interval [times[j], times[j+1]] containing the segment
                let j = (first_interior + segment).saturating_sub(1).min(times.len() - 2);
                let w = ((t - times[j]) / (times[j + 1] - times[j])).clamp(0.0, 1.0);
                for ((o, &x0), &x1) in out.iter_mut().zip(values[j].as_slice()).zip(values[j + 1].as_slice()) {
                    *o = (1.0 - w) * x0 + w * x1;
                }
            }
            ProfileKind::Trigonometric { omega, constant, cos, sin } => {
                out.copy_from_slice(constant.as_slice());
                for (k, (ck, sk)) in cos.iter().zip(sin).enumerate() {
                    let (s, c) = ((k + 1) as f64 * omega * t).sin_cos();
                    for ((o, &x), &y) in out.iter_mut().zip(ck.as_slice()).zip(sk.as_slice()) {
                        *o += c * x + s * y;
                    }
                }
            }
        }
    }

    /// Smallest eigenvalue of `R(t)` over `[a, b]`: exact for the constant
    /// and linearly interpolated kinds (the smallest eigenvalue is concave
    /// along segments), sampled on a grid of `density` points per unit
    /// otherwise.
    pub fn min_eigenvalue(&self, density: usize) -> f64 {
        let lowest = |m: &RealMatrix| sym_eig(m).expect("profile matrices are symmetric").values[0];
        match &self.kind {
            ProfileKind::Constant { r } => lowest(r),
            ProfileKind::DiagonalConstant { diag } => diag.iter().copied().fold(f64::INFINITY, f64::min),
            ProfileKind::PiecewiseConstant { .. } => (0..=self.breaks.len())
                .map(|seg| {
                    let mut m = RealMatrix::zeros(self.n, self.n);
                    self.eval_into(self.a, seg, m.as_mut_slice());
                    lowest(&m)
                })
                .fold(f64::INFINITY, f64::min),
            ProfileKind::SampledLinearInterp { .. } => {
                let mut nodes = vec![self.a, self.b];
                nodes.extend_from_slice(&self.breaks);
                nodes
                    .iter()
                    .map(|&t| lowest(&self.eval(t).expect("node inside domain")))
                    .fold(f64::INFINITY, f64::min)
            }
            _ => {
                let samples = ((self.len() * density as f64).ceil() as usize).max(2);
                let mut m = RealMatrix::zeros(self.n, self.n);
                (0..=samples)
                    .map(|i| {
                        let t = self.a + self.len() * i as f64 / samples as f64;
                        self.eval_into(t, self.segment_of(t), m.as_mut_slice());
                        lowest(&m)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}
