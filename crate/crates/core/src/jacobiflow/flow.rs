use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::CurvatureProfile;
use crate::error::{Error, Result};
use crate::lagrangian::{canonical_sigma, complex_structure, isotropy, orthonormalize_columns, LagrangianFrame};
use crate::RealMatrix;

/// Integration controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSettings {
    /// Steps per unit of the parameter.
    pub steps: usize,
    /// Columns are re-orthonormalized (and drift checked) this often.
    pub renormalize_every: usize,
    /// Bound on `‖MᵀJM‖` for the orthonormalized frame.
    pub drift_tol: f64,
}

impl Default for FlowSettings {
    fn default() -> Self {
        FlowSettings {
            steps: 4096,
            renormalize_every: 64,
            drift_tol: 1e-6,
        }
    }
}

impl FlowSettings {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 16 {
            return Err(Error::InvalidInput(format!("steps = {} is below the minimum of 16", self.steps)));
        }
        if self.renormalize_every == 0 {
            return Err(Error::InvalidInput("renormalize_every must be positive".into()));
        }
        if !(self.drift_tol > 0.0 && self.drift_tol.is_finite()) {
            return Err(Error::InvalidInput("drift_tol must be positive".into()));
        }
        Ok(())
    }

    /// Same settings with the step halved.
    pub fn refined(&self) -> Self {
        FlowSettings {
            steps: self.steps * 2,
            renormalize_every: self.renormalize_every * 2,
            ..*self
        }
    }
}

/// `A(t, λ) = [[0, I], [R(t) - λI, 0]]`.
pub fn coefficient(profile: &CurvatureProfile, t: f64, lambda: f64) -> Result<RealMatrix> {
    let r = profile.eval(t)?;
    let n = profile.n();
    let mut a = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(i, n + i)] = 1.0;
        for j in 0..n {
            a[(n + i, j)] = r[(i, j)];
        }
        a[(n + i, i)] -= lambda;
    }
    Ok(a)
}

/// Largest drift seen by the integrations sharing this monitor.
#[derive(Debug, Default)]
pub struct DriftMonitor(AtomicU64);

impl DriftMonitor {
    pub fn record(&self, drift: f64) {
        self.0.fetch_max(drift.to_bits(), Ordering::Relaxed);
    }

    pub fn max(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    t0: f64,
    h: f64,
    steps: usize,
    segment: usize,
}

/// Fixed-step schedule from `t0` to `t1`, split at the profile's breakpoints
/// so no step straddles a discontinuity.
fn schedule(profile: &CurvatureProfile, t0: f64, t1: f64, steps_per_unit: usize) -> Vec<Piece> {
    let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
    let mut cuts = vec![lo];
    cuts.extend(profile.breakpoints().iter().copied().filter(|&x| x > lo && x < hi));
    cuts.push(hi);
    if t0 > t1 {
        cuts.reverse();
    }
    cuts.windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| {
            let len = w[1] - w[0];
            let steps = ((len.abs() * steps_per_unit as f64).ceil() as usize).max(1);
            Piece {
                t0: w[0],
                h: len / steps as f64,
                steps,
                segment: profile.segment_of(0.5 * (w[0] + w[1])),
            }
        })
        .collect()
}

/// Precomputed step schedule over `[t0, t1]`, optionally with `R` tabulated
/// at every half step so that repeated runs (different `λ`, same interval)
/// skip curvature evaluation.
pub struct FlowPlan<'p> {
    profile: &'p CurvatureProfile,
    pieces: Vec<Piece>,
    table: Option<Vec<f64>>,
}

const TABLE_BUDGET: usize = 1 << 23;

impl<'p> FlowPlan<'p> {
    pub fn new(profile: &'p CurvatureProfile, t0: f64, t1: f64, settings: &FlowSettings, tabulate: bool) -> Result<Self> {
        profile.domain_check(t0)?;
        profile.domain_check(t1)?;
        let pieces = schedule(profile, t0, t1, settings.steps);
        let n2 = profile.n() * profile.n();
        let half_steps: usize = pieces.iter().map(|p| 2 * p.steps + 1).sum();
        let table = (tabulate && half_steps * n2 <= TABLE_BUDGET).then(|| {
            let mut tab = vec![0.0; half_steps * n2];
            let mut off = 0;
            for p in &pieces {
                for k in 0..=2 * p.steps {
                    let t = p.t0 + 0.5 * p.h * k as f64;
                    profile.eval_into(t, p.segment, &mut tab[off..off + n2]);
                    off += n2;
                }
            }
            tab
        });
        Ok(FlowPlan { profile, pieces, table })
    }

    /// Advances the `2n x cols` row-major state `y` with classical RK4 under
    /// `Y' = A(t, λ) Y`. With `renormalize` the columns are re-orthonormalized
    /// every `renormalize_every` steps and at the end, and the isotropy drift
    /// is checked against `drift_tol`. Returns the largest drift seen.
    pub fn run(&self, lambda: f64, y: &mut [f64], cols: usize, settings: &FlowSettings, renormalize: bool) -> Result<f64> {
        let n = self.profile.n();
        let n2 = n * n;
        let len = 2 * n * cols;
        assert_eq!(y.len(), len, "state size mismatch");

        let mut r0 = vec![0.0; n2];
        let mut rm = vec![0.0; n2];
        let mut r1 = vec![0.0; n2];
        let mut k1 = vec![0.0; len];
        let mut k2 = vec![0.0; len];
        let mut k3 = vec![0.0; len];
        let mut k4 = vec![0.0; len];
        let mut tmp = vec![0.0; len];
        let mut max_drift: f64 = 0.0;
        let mut since_renorm = 0usize;
        let mut table_off = 0usize;

        // f(Y) = [P; (R - λ) X]
        let deriv = |r: &[f64], src: &[f64], out: &mut [f64]| {
            let (x, p) = src.split_at(n * cols);
            let (top, bottom) = out.split_at_mut(n * cols);
            top.copy_from_slice(p);
            for i in 0..n {
                let row = &r[i * n..(i + 1) * n];
                for c in 0..cols {
                    let mut acc = -lambda * x[i * cols + c];
                    for (j, &rij) in row.iter().enumerate() {
                        acc += rij * x[j * cols + c];
                    }
                    bottom[i * cols + c] = acc;
                }
            }
        };

        for piece in &self.pieces {
            let h = piece.h;
            for s in 0..piece.steps {
                let t = piece.t0 + h * s as f64;
                match &self.table {
                    Some(tab) => {
                        let base = table_off + 2 * s * n2;
                        r0.copy_from_slice(&tab[base..base + n2]);
                        rm.copy_from_slice(&tab[base + n2..base + 2 * n2]);
                        r1.copy_from_slice(&tab[base + 2 * n2..base + 3 * n2]);
                    }
                    None => {
                        if s == 0 {
                            self.profile.eval_into(t, piece.segment, &mut r0);
                        } else {
                            r0.copy_from_slice(&r1);
                        }
                        self.profile.eval_into(t + 0.5 * h, piece.segment, &mut rm);
                        self.profile.eval_into(t + h, piece.segment, &mut r1);
                    }
                }

                deriv(&r0, y, &mut k1);
                for i in 0..len {
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                deriv(&rm, &tmp, &mut k2);
                for i in 0..len {
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                }
                deriv(&rm, &tmp, &mut k3);
                for i in 0..len {
                    tmp[i] = y[i] + h * k3[i];
                }
                deriv(&r1, &tmp, &mut k4);
                for i in 0..len {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }

                since_renorm += 1;
                if renormalize && since_renorm >= settings.renormalize_every {
                    since_renorm = 0;
                    max_drift = max_drift.max(self.renormalize(y, cols, t + h, settings)?);
                }
            }
            table_off += (2 * piece.steps + 1) * n2;
        }
        if renormalize {
            let t_end = self.pieces.last().map_or(0.0, |p| p.t0 + p.h * p.steps as f64);
            max_drift = max_drift.max(self.renormalize(y, cols, t_end, settings)?);
        }
        Ok(max_drift)
    }

    fn renormalize(&self, y: &mut [f64], cols: usize, t: f64, settings: &FlowSettings) -> Result<f64> {
        let rows = 2 * self.profile.n();
        if !orthonormalize_columns(y, rows, cols) {
            return Err(Error::numerical(t, "frame lost rank during integration"));
        }
        let m = RealMatrix::from_row_major(rows, cols, y.to_vec())
            .map_err(|_| Error::numerical(t, "non-finite frame"))?;
        let drift = isotropy(&m);
        if drift > settings.drift_tol {
            return Err(Error::numerical(t, format!("symplectic drift {drift:.3e} exceeds {:.1e}", settings.drift_tol)));
        }
        Ok(drift)
    }
}

/// Flows a Lagrangian frame from `t0` to `t1`; returns the orthonormalized
/// frame at `t1` and the largest isotropy drift seen.
pub fn integrate_frame_with_drift(
    profile: &CurvatureProfile,
    lambda: f64,
    frame: &LagrangianFrame,
    t0: f64,
    t1: f64,
    settings: &FlowSettings,
) -> Result<(LagrangianFrame, f64)> {
    settings.validate()?;
    if frame.n() != profile.n() {
        return Err(Error::InvalidInput("frame and profile dimensions differ".into()));
    }
    let plan = FlowPlan::new(profile, t0, t1, settings, false)?;
    let n = profile.n();
    let mut y = frame.matrix().as_slice().to_vec();
    let drift = plan.run(lambda, &mut y, n, settings, true)?;
    let m = RealMatrix::from_row_major(2 * n, n, y).map_err(|_| Error::numerical(t1, "non-finite frame"))?;
    Ok((LagrangianFrame::from_matrix_unchecked(m), drift))
}

pub fn integrate_frame(
    profile: &CurvatureProfile,
    lambda: f64,
    frame: &LagrangianFrame,
    t0: f64,
    t1: f64,
    settings: &FlowSettings,
) -> Result<LagrangianFrame> {
    integrate_frame_with_drift(profile, lambda, frame, t0, t1, settings).map(|(f, _)| f)
}

/// `σ_λ(t)`: the flow of `σ` from `a` to `t`.
pub fn sigma_lambda(profile: &CurvatureProfile, lambda: f64, t: f64, settings: &FlowSettings) -> Result<LagrangianFrame> {
    integrate_frame(profile, lambda, &canonical_sigma(profile.n()), profile.a(), t, settings)
}

/// `σ_λ(t)` at every time in `times` (ascending, inside `[a, b]`), integrated
/// in one sweep.
pub fn sigma_lambda_sweep(
    profile: &CurvatureProfile,
    lambda: f64,
    times: &[f64],
    settings: &FlowSettings,
    monitor: Option<&DriftMonitor>,
) -> Result<Vec<LagrangianFrame>> {
    settings.validate()?;
    let n = profile.n();
    let mut y = canonical_sigma(n).into_matrix().into_vec();
    let mut t_prev = profile.a();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t < t_prev {
            return Err(Error::InvalidInput("sweep times must be ascending".into()));
        }
        if t > t_prev {
            let plan = FlowPlan::new(profile, t_prev, t, settings, false)?;
            let drift = plan.run(lambda, &mut y, n, settings, true)?;
            if let Some(m) = monitor {
                m.record(drift);
            }
            t_prev = t;
        }
        let m = RealMatrix::from_row_major(2 * n, n, y.clone()).map_err(|_| Error::numerical(t, "non-finite frame"))?;
        out.push(LagrangianFrame::from_matrix_unchecked(m));
    }
    Ok(out)
}

/// Fundamental matrix `Φ(t)` of `Y' = A(t, λ) Y` with `Φ(t₀) = I`.
#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    pub phi: RealMatrix,
    pub t0: f64,
    pub t: f64,
}

pub fn fundamental_solution(
    profile: &CurvatureProfile,
    lambda: f64,
    t0: f64,
    t1: f64,
    settings: &FlowSettings,
) -> Result<FundamentalSolution> {
    settings.validate()?;
    let n = profile.n();
    let plan = FlowPlan::new(profile, t0, t1, settings, false)?;
    let mut y = RealMatrix::identity(2 * n).into_vec();
    plan.run(lambda, &mut y, 2 * n, settings, false)?;
    let phi = RealMatrix::from_row_major(2 * n, 2 * n, y).map_err(|_| Error::numerical(t1, "non-finite flow"))?;
    let sol = FundamentalSolution { phi, t0, t: t1 };
    let residual = symplectic_residual(&sol);
    if residual > settings.drift_tol {
        return Err(Error::numerical(t1, format!("symplectic residual {residual:.3e} exceeds {:.1e}", settings.drift_tol)));
    }
    Ok(sol)
}

/// `‖ΦᵀJΦ - J‖` (max-abs entry).
pub fn symplectic_residual(sol: &FundamentalSolution) -> f64 {
    let n2 = sol.phi.rows();
    let j = complex_structure(n2 / 2);
    let lhs = sol.phi.tr_mul(&j.matmul(&sol.phi));
    (&lhs - &j).norm_max()
}

/// Lower bound for the Dirichlet spectrum on every `[a, t]`: the smallest
/// eigenvalue of `R(t)` over the interval minus `margin`. Below it
/// `R(t) - λI` is positive definite, so no `λ`-Jacobi field vanishes twice.
pub fn lambda_lower_bound(profile: &CurvatureProfile, margin: f64, settings: &FlowSettings) -> Result<f64> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidInput("margin must be positive".into()));
    }
    Ok(profile.min_eigenvalue(16 * settings.steps) - margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{intersection_dim, to_chart, IndexSet};
    use crate::numkernel::DEFAULT_RANK_TOL;
    use std::f64::consts::PI;

    fn scalar(c: f64, a: f64, b: f64) -> CurvatureProfile {
        CurvatureProfile::diagonal(vec![c], a, b).unwrap()
    }

    fn spans(frame: &LagrangianFrame, x: f64, y: f64) -> bool {
        let m = frame.matrix();
        // 1-d subspace spanned by (x, y)
        (m[(0, 0)] * y - m[(1, 0)] * x).abs() < 1e-9 * (x.hypot(y)) * m[(0, 0)].hypot(m[(1, 0)])
    }

    #[test]
    fn coefficient_blocks() {
        let flat = scalar(0.0, 0.0, 1.0);
        let a = coefficient(&flat, 0.5, 0.0).unwrap();
        assert_eq!(a.as_slice(), &[0.0, 1.0, 0.0, 0.0]);
        let a = coefficient(&flat, 0.5, -1.0).unwrap();
        assert_eq!(a.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let p = CurvatureProfile::constant(RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, -3.0]]).unwrap(), 0.0, 1.0).unwrap();
        let a = coefficient(&p, 0.2, 0.7).unwrap();
        let ja = complex_structure(2).matmul(&a);
        assert_eq!(ja.asymmetry(), 0.0);
        assert!(matches!(coefficient(&p, 1.5, 0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn flat_flow_is_shear() {
        let flat = CurvatureProfile::diagonal(vec![0.0, 0.0], 0.0, 3.0).unwrap();
        let f = sigma_lambda(&flat, 0.0, 2.5, &FlowSettings::default()).unwrap();
        let want = LagrangianFrame::new(RealMatrix::vstack(
            &RealMatrix::identity(2).scale(2.5),
            &RealMatrix::identity(2),
        ))
        .unwrap();
        assert!(f.same_subspace(&want, 1e-10).unwrap());
    }

    #[test]
    fn oscillating_and_hyperbolic_closed_forms() {
        let s = FlowSettings::default();
        let osc = scalar(-1.0, 0.0, 10.0);
        for t in [0.5, 1.7, 3.0, 6.0] {
            assert!(spans(&sigma_lambda(&osc, 0.0, t, &s).unwrap(), t.sin(), t.cos()), "t = {t}");
        }
        let pi_frame = sigma_lambda(&osc, 0.0, PI, &s).unwrap();
        assert_eq!(intersection_dim(&pi_frame, DEFAULT_RANK_TOL).unwrap(), 1);

        let hyp = scalar(1.0, 0.0, 5.0);
        for t in [0.5, 2.0, 4.5] {
            let f = sigma_lambda(&hyp, 0.0, t, &s).unwrap();
            assert!(spans(&f, t.sinh(), t.cosh()));
            assert_eq!(intersection_dim(&f, DEFAULT_RANK_TOL).unwrap(), 0);
        }
    }

    #[test]
    fn start_is_sigma() {
        let p = scalar(-2.0, 1.0, 2.0);
        let f = sigma_lambda(&p, 0.3, 1.0, &FlowSettings::default()).unwrap();
        assert!(f.same_subspace(&canonical_sigma(1), 1e-15).unwrap());
    }

    #[test]
    fn below_lower_bound_never_meets_sigma() {
        let s = FlowSettings { steps: 256, ..Default::default() };
        let p = CurvatureProfile::diagonal(vec![-1.0, -4.0], 0.0, 4.0).unwrap();
        let lam = lambda_lower_bound(&p, 1.0, &s).unwrap();
        assert_eq!(lam, -5.0);
        let times: Vec<f64> = (1..=64).map(|i| 4.0 * i as f64 / 64.0).collect();
        for f in sigma_lambda_sweep(&p, lam, &times, &s, None).unwrap() {
            assert_eq!(intersection_dim(&f, DEFAULT_RANK_TOL).unwrap(), 0);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let s = FlowSettings::default();
        assert_eq!(lambda_lower_bound(&scalar(0.0, 0.0, 1.0), 0.5, &s).unwrap(), -0.5);
        assert_eq!(lambda_lower_bound(&scalar(-1.0, 0.0, 1.0), 0.5, &s).unwrap(), -1.5);
        assert!(lambda_lower_bound(&scalar(0.0, 0.0, 1.0), 0.0, &s).is_err());
    }

    #[test]
    fn symplectic_residual_examples() {
        let id = FundamentalSolution { phi: RealMatrix::identity(2), t0: 0.0, t: 0.0 };
        assert_eq!(symplectic_residual(&id), 0.0);
        let th: f64 = 0.7;
        let rot = RealMatrix::from_rows(&[vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]]).unwrap();
        assert!(symplectic_residual(&FundamentalSolution { phi: rot, t0: 0.0, t: 0.0 }) < 1e-15);

        let p = CurvatureProfile::new(
            2,
            0.0,
            2.0,
            super::super::ProfileKind::PolynomialEntries {
                coeffs: vec![
                    RealMatrix::from_rows(&[vec![-1.0, 0.3], vec![0.3, 0.5]]).unwrap(),
                    RealMatrix::from_rows(&[vec![0.2, -0.1], vec![-0.1, -0.4]]).unwrap(),
                ],
            },
        )
        .unwrap();
        let sol = fundamental_solution(&p, 0.0, 0.0, 2.0, &FlowSettings { steps: 10_000, ..Default::default() }).unwrap();
        assert!(symplectic_residual(&sol) < 1e-6);
    }

    #[test]
    fn backward_integration_returns_to_sigma() {
        let s = FlowSettings::default();
        let p = CurvatureProfile::constant(RealMatrix::from_rows(&[vec![-2.0, 0.5], vec![0.5, 1.0]]).unwrap(), 0.0, 3.0).unwrap();
        let fwd = sigma_lambda(&p, -0.3, 3.0, &s).unwrap();
        let back = integrate_frame(&p, -0.3, &fwd, 3.0, 0.0, &s).unwrap();
        assert!(back.same_subspace(&canonical_sigma(2), 1e-8).unwrap());
    }

    #[test]
    fn omega_is_conserved() {
        // ω between two solution columns of the fundamental matrix stays put
        let p = CurvatureProfile::diagonal(vec![-3.0, 0.5], 0.0, 2.0).unwrap();
        let s = FlowSettings::default();
        let j = complex_structure(2);
        let mut values = Vec::new();
        for t in [0.5, 1.0, 2.0] {
            let phi = fundamental_solution(&p, 0.2, 0.0, t, &s).unwrap().phi;
            let y = phi.column(0);
            let z = phi.column(3);
            let jy = j.mul_vec(&y);
            values.push(jy.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>());
        }
        for v in &values {
            assert!((v - values[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn step_halving_converges_at_fourth_order() {
        let p = CurvatureProfile::new(
            1,
            0.0,
            2.0,
            super::super::ProfileKind::PolynomialEntries { coeffs: vec![RealMatrix::from_diagonal(&[-4.0]), RealMatrix::from_diagonal(&[1.0])] },
        )
        .unwrap();
        let chart = |steps: usize| {
            let s = FlowSettings { steps, ..Default::default() };
            to_chart(&sigma_lambda(&p, 0.0, 2.0, &s).unwrap(), &IndexSet::full(1)).unwrap().s[(0, 0)]
        };
        let (c1, c2, c3) = (chart(16), chart(32), chart(64));
        let ratio = (c1 - c2) / (c2 - c3);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }
}
