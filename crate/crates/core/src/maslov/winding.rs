use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use super::LagrangianPath;
use crate::error::{Error, Result};
use crate::lagrangian::{det2, UnitComplex};

/// Steps whose `Det²` phase increment exceeds this are bisected.
pub const MAX_STEP_PHASE: f64 = FRAC_PI_2;
/// Bisection depth allowed per coarse step.
pub const MAX_BISECTION_DEPTH: usize = 20;

/// Unwrapped phase of `Det²` along a sampled path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct WindingAccumulator {
    pub total_phase: f64,
    pub samples: usize,
    pub max_step_phase: f64,
}

impl WindingAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, dphase: f64) {
        self.total_phase += dphase;
        self.samples += 1;
        self.max_step_phase = self.max_step_phase.max(dphase.abs());
    }

    pub fn append(&mut self, other: &WindingAccumulator) {
        self.total_phase += other.total_phase;
        self.samples += other.samples;
        self.max_step_phase = self.max_step_phase.max(other.max_step_phase);
    }

    /// Total phase in turns.
    pub fn winding(&self) -> f64 {
        self.total_phase / TAU
    }
}

/// Phase trace `(u, unwrapped arg Det²)`, including bisection points.
pub type PhaseTrace = Vec<(f64, f64)>;

/// Accumulates the phase between consecutive samples `(u, Det²(u))`,
/// bisecting any step wider than [`MAX_STEP_PHASE`].
pub(crate) fn accumulate<P: LagrangianPath + ?Sized>(
    path: &P,
    samples: &[(f64, UnitComplex)],
    acc: &mut WindingAccumulator,
    trace: &mut PhaseTrace,
) -> Result<()> {
    let Some(&(u_first, d_first)) = samples.first() else {
        return Ok(());
    };
    let base = d_first.arg();
    trace.push((u_first, base));
    for w in samples.windows(2) {
        step(path, w[0], w[1], 0, acc, trace, base)?;
    }
    Ok(())
}

fn step<P: LagrangianPath + ?Sized>(
    path: &P,
    (ua, da): (f64, UnitComplex),
    (ub, db): (f64, UnitComplex),
    depth: usize,
    acc: &mut WindingAccumulator,
    trace: &mut PhaseTrace,
    base: f64,
) -> Result<()> {
    let d = db.phase_from(da);
    if d.abs() <= MAX_STEP_PHASE {
        acc.push(d);
        trace.push((ub, base + acc.total_phase));
        return Ok(());
    }
    if depth >= MAX_BISECTION_DEPTH {
        return Err(Error::numerical(
            ua,
            format!("Det² phase jumps {d:.3} over [{ua}, {ub}] after {MAX_BISECTION_DEPTH} bisections"),
        ));
    }
    let um = 0.5 * (ua + ub);
    let dm = det2(&path.frame_at(um)?)?;
    step(path, (ua, da), (um, dm), depth + 1, acc, trace, base)?;
    step(path, (um, dm), (ub, db), depth + 1, acc, trace, base)
}

fn uniform_grid(u0: f64, u1: f64, samples: usize) -> Vec<f64> {
    let h = (u1 - u0) / samples as f64;
    (0..=samples)
        .map(|i| if i == samples { u1 } else { u0 + h * i as f64 })
        .collect()
}

/// Unwrapped `Det²` phase along the path with its trace, starting from
/// `samples + 1` uniform points.
pub fn winding_with_trace<P: LagrangianPath + ?Sized>(path: &P, samples: usize) -> Result<(WindingAccumulator, PhaseTrace)> {
    if samples == 0 {
        return Err(Error::InvalidInput("at least one winding step is required".into()));
    }
    let (u0, u1) = path.domain();
    let us = uniform_grid(u0, u1, samples);
    let frames = path.frames_on(&us)?;
    let dets = us
        .iter()
        .zip(&frames)
        .map(|(&u, f)| Ok((u, det2(f)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = WindingAccumulator::new();
    let mut trace = PhaseTrace::new();
    accumulate(path, &dets, &mut acc, &mut trace)?;
    Ok((acc, trace))
}

/// Total `Det²` phase along the path divided by `2π`.
pub fn winding_det2<P: LagrangianPath + ?Sized>(path: &P, samples: usize) -> Result<f64> {
    winding_with_trace(path, samples).map(|(acc, _)| acc.winding())
}
