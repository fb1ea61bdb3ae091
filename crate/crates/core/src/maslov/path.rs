use std::sync::Mutex;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobiflow::{CurvatureProfile, DriftMonitor, FlowPlan, FlowSettings};
use crate::lagrangian::{canonical_sigma, rotate, IndexSet, LagrangianFrame};
use crate::RealMatrix;

/// Where a path sits in the `(t, λ)` rectangle, if anywhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EdgeKind {
    /// `t ↦ σ_λ(t)` at fixed `λ`.
    TimeEdge { lambda: f64 },
    /// `μ ↦ σ_μ(t)` at fixed `t`.
    LambdaEdge { t: f64 },
    /// Straight segment in the `(t, λ)` plane.
    Segment { from: (f64, f64), to: (f64, f64) },
    Rotation,
    Other,
}

/// A continuous map `u ↦ λ(u)` from `[u₀, u₁]` into the Lagrangian
/// Grassmannian, oriented by increasing `u`.
pub trait LagrangianPath: Sync {
    fn domain(&self) -> (f64, f64);

    fn frame_at(&self, u: f64) -> Result<LagrangianFrame>;

    /// Frames at ascending parameters. Paths that are integrated should
    /// override this with a single sweep.
    fn frames_on(&self, us: &[f64]) -> Result<Vec<LagrangianFrame>> {
        us.iter().map(|&u| self.frame_at(u)).collect()
    }

    fn kind(&self) -> EdgeKind {
        EdgeKind::Other
    }

    /// Largest isotropy drift seen while producing frames, if tracked.
    fn max_drift(&self) -> f64 {
        0.0
    }
}

impl<P: LagrangianPath + ?Sized> LagrangianPath for &P {
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn frame_at(&self, u: f64) -> Result<LagrangianFrame> {
        (**self).frame_at(u)
    }
    fn frames_on(&self, us: &[f64]) -> Result<Vec<LagrangianFrame>> {
        (**self).frames_on(us)
    }
    fn kind(&self) -> EdgeKind {
        (**self).kind()
    }
    fn max_drift(&self) -> f64 {
        (**self).max_drift()
    }
}

impl<P: LagrangianPath + ?Sized> LagrangianPath for Box<P> {
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn frame_at(&self, u: f64) -> Result<LagrangianFrame> {
        (**self).frame_at(u)
    }
    fn frames_on(&self, us: &[f64]) -> Result<Vec<LagrangianFrame>> {
        (**self).frames_on(us)
    }
    fn kind(&self) -> EdgeKind {
        (**self).kind()
    }
    fn max_drift(&self) -> f64 {
        (**self).max_drift()
    }
}

fn check_domain(u0: f64, u1: f64) -> Result<()> {
    if !(u0.is_finite() && u1.is_finite() && u0 < u1) {
        return Err(Error::InvalidInput(format!("path domain [{u0}, {u1}] is empty")));
    }
    Ok(())
}

/// The same path traversed backwards: `u ↦ λ(u₀ + u₁ - u)`.
pub struct Reversed<P>(pub P);

impl<P: LagrangianPath> LagrangianPath for Reversed<P> {
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }

    fn frame_at(&self, u: f64) -> Result<LagrangianFrame> {
        let (u0, u1) = self.0.domain();
        self.0.frame_at(u0 + u1 - u)
    }

    fn frames_on(&self, us: &[f64]) -> Result<Vec<LagrangianFrame>> {
        let (u0, u1) = self.0.domain();
        let inner: Vec<f64> = us.iter().rev().map(|&u| u0 + u1 - u).collect();
        let mut frames = self.0.frames_on(&inner)?;
        frames.reverse();
        Ok(frames)
    }

    fn kind(&self) -> EdgeKind {
        self.0.kind()
    }

    fn max_drift(&self) -> f64 {
        self.0.max_drift()
    }
}

/// A path given by a closure.
pub struct FnPath<F> {
    u0: f64,
    u1: f64,
    f: F,
}

impl<F> FnPath<F>
where
    F: Fn(f64) -> Result<LagrangianFrame> + Sync,
{
    pub fn new(u0: f64, u1: f64, f: F) -> Result<Self> {
        check_domain(u0, u1)?;
        Ok(FnPath { u0, u1, f })
    }
}

impl<F> LagrangianPath for FnPath<F>
where
    F: Fn(f64) -> Result<LagrangianFrame> + Sync,
{
    fn domain(&self) -> (f64, f64) {
        (self.u0, self.u1)
    }

    fn frame_at(&self, u: f64) -> Result<LagrangianFrame> {
        (self.f)(u)
    }
}

/// `u ↦ e^{iu}` applied to the `K` coordinates of a fixed Lagrangian.
pub struct RotationPath {
    base: LagrangianFrame,
    k: IndexSet,
    u0: f64,
    u1: f64,
}

impl RotationPath {
    pub fn new(base: LagrangianFrame, k: IndexSet, u0: f64, u1: f64) -> Result<Self> {
        check_domain(u0, u1)?;
        if k.indices().iter().any(|&i| i >= base.n()) {
            return Err(Error::InvalidInput("rotation index out of range".into()));
        }
        Ok(RotationPath { base, k, u0, u1 })
    }

    /// The full flow `e^{iu} λ_S` over `[0, π]`, a closed loop.
    pub fn graph_loop(s: &RealMatrix) -> Result<Self> {
        let base = LagrangianFrame::graph(s)?;
        let n = base.n();
        RotationPath::new(base, IndexSet::full(n), 0.0, std::f64::consts::PI)
    }
}

impl LagrangianPath for RotationPath {
    fn domain(&self) -> (f64, f64) {
        (self.u0, self.u1)
    }

    fn frame_at(&self, u: f64) -> Result<LagrangianFrame> {
        Ok(rotate(&self.base, &self.k, u))
    }

    fn kind(&self) -> EdgeKind {
        EdgeKind::Rotation
    }
}

const MAX_CHECKPOINTS: usize = 8192;

/// `t ↦ σ_λ(t)` over `[t₀, t₁] ⊂ [a, b]` at fixed `λ`. Integrated states
/// are cached so later evaluations restart from the nearest earlier time.
pub struct JacobiTimeEdge<'p> {
    profile: &'p CurvatureProfile,
    lambda: f64,
    t0: f64,
    t1: f64,
    settings: FlowSettings,
    checkpoints: Mutex<Vec<(f64, Vec<f64>)>>,
    monitor: DriftMonitor,
}

impl<'p> JacobiTimeEdge<'p> {
    pub fn new(profile: &'p CurvatureProfile, lambda: f64, t0: f64, t1: f64, settings: &FlowSettings) -> Result<Self> {
        settings.validate()?;
        check_domain(t0, t1)?;
        profile.domain_check(t0)?;
        profile.domain_check(t1)?;
        let start = canonical_sigma(profile.n()).into_matrix().into_vec();
        Ok(JacobiTimeEdge {
            profile,
            lambda,
            t0,
            t1,
            settings: *settings,
            checkpoints: Mutex::new(vec![(profile.a(), start)]),
            monitor: DriftMonitor::default(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn nearest_checkpoint(&self, t: f64) -> (f64, Vec<f64>) {
        let cps = self.checkpoints.lock().expect("checkpoint lock");
        let idx = cps.partition_point(|(s, _)| *s <= t);
        let (s, y) = &cps[idx.saturating_sub(1)];
        (*s, y.clone())
    }

    fn store(&self, t: f64, y: &[f64]) {
        let mut cps = self.checkpoints.lock().expect("checkpoint lock");
        if cps.len() >= MAX_CHECKPOINTS {
            return;
        }
        let idx = cps.partition_point(|(s, _)| *s < t);
        if idx < cps.len() && cps[idx].0 == t {
            return;
        }
        cps.insert(idx, (t, y.to_vec()));
    }

    fn advance(&self, from: f64, to: f64, y: &mut [f64]) -> Result<()> {
        if to > from {
            let plan = FlowPlan::new(self.profile, from, to, &self.settings, false)?;
            let drift = plan.run(self.lambda, y, self.profile.n(), &self.settings, true)?;
            self.monitor.record(drift);
        }
        Ok(())
    }

    fn to_frame(&self, t: f64, y: Vec<f64>) -> Result<LagrangianFrame> {
        let n = self.profile.n();
        let m = RealMatrix::from_row_major(2 * n, n, y).map_err(|_| Error::numerical(t, "non-finite frame"))?;
        Ok(LagrangianFrame::from_matrix_unchecked(m))
    }
}

impl LagrangianPath for JacobiTimeEdge<'_> {
    fn domain(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    fn frame_at(&self, t: f64) -> Result<LagrangianFrame> {
        self.profile.domain_check(t)?;
        let (s, mut y) = self.nearest_checkpoint(t);
        self.advance(s, t, &mut y)?;
        self.to_frame(t, y)
    }

    fn frames_on(&self, us: &[f64]) -> Result<Vec<LagrangianFrame>> {
        let Some(&first) = us.first() else {
            return Ok(Vec::new());
        };
        self.profile.domain_check(first)?;
        let (mut s, mut y) = self.nearest_checkpoint(first);
        let mut out = Vec::with_capacity(us.len());
        for &t in us {
            if t < s {
                return Err(Error::InvalidInput("sample parameters must be ascending".into()));
            }
            self.profile.domain_check(t)?;
            self.advance(s, t, &mut y)?;
            s = t;
            self.store(t, &y);
            out.push(self.to_frame(t, y.clone())?);
        }
        Ok(out)
    }

    fn kind(&self) -> EdgeKind {
        EdgeKind::TimeEdge { lambda: self.lambda }
    }

    fn max_drift(&self) -> f64 {
        self.monitor.max()
    }
}

/// `μ ↦ σ_μ(t)` over `[μ₀, μ₁]` at fixed `t`.
pub struct JacobiLambdaEdge<'p> {
    profile: &'p CurvatureProfile,
    t: f64,
    mu0: f64,
    mu1: f64,
    settings: FlowSettings,
    plan: FlowPlan<'p>,
    monitor: DriftMonitor,
}

impl<'p> JacobiLambdaEdge<'p> {
    pub fn new(profile: &'p CurvatureProfile, t: f64, mu0: f64, mu1: f64, settings: &FlowSettings) -> Result<Self> {
        settings.validate()?;
        check_domain(mu0, mu1)?;
        let plan = FlowPlan::new(profile, profile.a(), t, settings, true)?;
        Ok(JacobiLambdaEdge {
            profile,
            t,
            mu0,
            mu1,
            settings: *settings,
            plan,
            monitor: DriftMonitor::default(),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }
}

impl LagrangianPath for JacobiLambdaEdge<'_> {
    fn domain(&self) -> (f64, f64) {
        (self.mu0, self.mu1)
    }

    fn frame_at(&self, mu: f64) -> Result<LagrangianFrame> {
        let n = self.profile.n();
        let mut y = canonical_sigma(n).into_matrix().into_vec();
        if self.t > self.profile.a() {
            let drift = self.plan.run(mu, &mut y, n, &self.settings, true)?;
            self.monitor.record(drift);
        }
        let m = RealMatrix::from_row_major(2 * n, n, y).map_err(|_| Error::numerical(mu, "non-finite frame"))?;
        Ok(LagrangianFrame::from_matrix_unchecked(m))
    }

    fn kind(&self) -> EdgeKind {
        EdgeKind::LambdaEdge { t: self.t }
    }

    fn max_drift(&self) -> f64 {
        self.monitor.max()
    }
}

/// `u ↦ σ_{λ(u)}(t(u))` along the straight segment from `(t₀, λ₀)` to
/// `(t₁, λ₁)`, parametrized by `u ∈ [0, 1]`.
pub struct SegmentPath<'p> {
    profile: &'p CurvatureProfile,
    from: (f64, f64),
    to: (f64, f64),
    settings: FlowSettings,
    monitor: DriftMonitor,
}

impl<'p> SegmentPath<'p> {
    pub fn new(profile: &'p CurvatureProfile, from: (f64, f64), to: (f64, f64), settings: &FlowSettings) -> Result<Self> {
        settings.validate()?;
        profile.domain_check(from.0)?;
        profile.domain_check(to.0)?;
        Ok(SegmentPath {
            profile,
            from,
            to,
            settings: *settings,
            monitor: DriftMonitor::default(),
        })
    }

    fn point(&self, u: f64) -> (f64, f64) {
        let t = self.from.0 + u * (self.to.0 - self.from.0);
        let l = self.from.1 + u * (self.to.1 - self.from.1);
        (t, l)
    }
}

impl LagrangianPath for SegmentPath<'_> {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn frame_at(&self, u: f64) -> Result<LagrangianFrame> {
        let (t, lambda) = self.point(u);
        let n = self.profile.n();
        let mut y = canonical_sigma(n).into_matrix().into_vec();
        if t > self.profile.a() {
            let plan = FlowPlan::new(self.profile, self.profile.a(), t, &self.settings, false)?;
            self.monitor.record(plan.run(lambda, &mut y, n, &self.settings, true)?);
        }
        let m = RealMatrix::from_row_major(2 * n, n, y).map_err(|_| Error::numerical(u, "non-finite frame"))?;
        Ok(LagrangianFrame::from_matrix_unchecked(m))
    }

    fn kind(&self) -> EdgeKind {
        EdgeKind::Segment {
            from: self.from,
            to: self.to,
        }
    }

    fn max_drift(&self) -> f64 {
        self.monitor.max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobiflow::sigma_lambda;

    #[test]
    fn time_edge_matches_direct_integration() {
        let p = CurvatureProfile::diagonal(vec![-1.0, 0.5], 0.0, 3.0).unwrap();
        let s = FlowSettings::default();
        let edge = JacobiTimeEdge::new(&p, -0.3, 0.5, 3.0, &s).unwrap();
        let frames = edge.frames_on(&[0.5, 1.0, 2.0]).unwrap();
        // evaluation after caching restarts from a checkpoint
        let late = edge.frame_at(2.5).unwrap();
        let direct = sigma_lambda(&p, -0.3, 2.5, &s).unwrap();
        assert!(late.same_subspace(&direct, 1e-9).unwrap());
        assert!(frames[1].same_subspace(&sigma_lambda(&p, -0.3, 1.0, &s).unwrap(), 1e-9).unwrap());
        assert!(edge.max_drift() < 1e-10);
    }

    #[test]
    fn lambda_edge_and_segment_agree_with_flow() {
        let p = CurvatureProfile::diagonal(vec![-2.0], 0.0, 2.0).unwrap();
        let s = FlowSettings::default();
        let edge = JacobiLambdaEdge::new(&p, 2.0, -3.0, 0.0, &s).unwrap();
        let seg = SegmentPath::new(&p, (1.0, -1.0), (2.0, -2.0), &s).unwrap();
        let want = sigma_lambda(&p, -2.0, 2.0, &s).unwrap();
        assert!(edge.frame_at(-2.0).unwrap().same_subspace(&want, 1e-9).unwrap());
        assert!(seg.frame_at(1.0).unwrap().same_subspace(&want, 1e-9).unwrap());
    }

    #[test]
    fn reversal_flips_parameter() {
        let r = RotationPath::graph_loop(&RealMatrix::from_diagonal(&[1.0])).unwrap();
        let back = Reversed(&r);
        let a = back.frame_at(0.3).unwrap();
        let b = r.frame_at(std::f64::consts::PI - 0.3).unwrap();
        assert!(a.same_subspace(&b, 1e-12).unwrap());
        let fs = back.frames_on(&[0.0, 1.0]).unwrap();
        assert!(fs[1].same_subspace(&r.frame_at(std::f64::consts::PI - 1.0).unwrap(), 1e-12).unwrap());
    }
}
