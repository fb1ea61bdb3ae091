use serde::{Deserialize, Serialize};

use super::winding::{accumulate, PhaseTrace, WindingAccumulator};
use super::{EdgeKind, LagrangianPath};
use crate::error::{Error, Result};
use crate::lagrangian::{chart_margin, det2, select_chart_with, to_chart, IndexSet, LagrangianFrame, UnitComplex};
use crate::numkernel::{determinant, singular_pairs, sym_eig, Spectrum};
use crate::RealMatrix;

/// Slack on the `-1` slope bound for Jacobi time edges.
pub const SLOPE_SLACK: f64 = 0.1;

/// Charts whose margin falls below this somewhere on a bracket are rejected.
const MIN_CHART_MARGIN: f64 = 1e-3;
/// Sub-samples per coarse cell when a flagged bracket shows no eigenvalue
/// sign change.
const TANGENCY_SUBSAMPLES: usize = 8;

/// Coarse-scan controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    /// Coarse grid cells per path.
    pub grid: usize,
    /// Rank tolerance; `√tol` is the dip threshold on `s_min`.
    pub tol: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings { grid: 512, tol: 1e-8 }
    }
}

impl ScanSettings {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 4 {
            return Err(Error::InvalidInput(format!("coarse grid {} is below the minimum of 4", self.grid)));
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return Err(Error::InvalidInput(format!("rank tolerance {} must lie in (0, 1e-2)", self.tol)));
        }
        Ok(())
    }

    pub fn dip(&self) -> f64 {
        self.tol.sqrt()
    }
}

/// An isolated intersection of the path with the train of `σ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingEvent {
    pub u_star: f64,
    pub multiplicity: usize,
    /// Sum of the signs over the kernel directions.
    pub contribution: i64,
    /// One sign per kernel direction, `-sign(slope)`.
    pub signs: Vec<i64>,
    /// Chart `K` (zero-based) in which `S₁` was read.
    pub chart: IndexSet,
    /// Eigenvalues of the crossing form: derivatives of the vanishing
    /// eigenvalues of `S₁` at `u_star`.
    pub slope_estimates: Vec<f64>,
}

/// Everything learned from one pass over a path.
#[derive(Clone, Debug, Serialize)]
pub struct PathScan {
    pub kind: EdgeKind,
    pub domain: (f64, f64),
    pub events: Vec<CrossingEvent>,
    /// Sum of the signed contributions.
    pub index: i64,
    pub winding: WindingAccumulator,
    #[serde(skip)]
    pub trace: PhaseTrace,
    /// Smallest `s_min` on the coarse grid outside event brackets.
    pub clearance: Option<f64>,
    pub max_drift: f64,
    #[serde(skip)]
    pub(crate) first: Option<LagrangianFrame>,
    #[serde(skip)]
    pub(crate) last: Option<LagrangianFrame>,
}

impl PathScan {
    pub fn total_multiplicity(&self) -> usize {
        self.events.iter().map(|e| e.multiplicity).sum()
    }

    /// The scan of the same path traversed backwards, without rescanning.
    pub fn reversed(self) -> PathScan {
        let (u0, u1) = self.domain;
        let flip = |u: f64| u0 + u1 - u;
        let mut events: Vec<CrossingEvent> = self
            .events
            .into_iter()
            .rev()
            .map(|e| CrossingEvent {
                u_star: flip(e.u_star),
                contribution: -e.contribution,
                signs: e.signs.iter().map(|s| -s).collect(),
                slope_estimates: e.slope_estimates.iter().map(|s| -s).collect(),
                ..e
            })
            .collect();
        for e in &mut events {
            // keep the crossing-form eigenvalues ascending
            e.slope_estimates.reverse();
            e.signs.reverse();
        }
        // the unwrapped phases are the same values read backwards
        let trace = self.trace.iter().rev().map(|&(u, ph)| (flip(u), ph)).collect();
        PathScan {
            kind: self.kind,
            domain: self.domain,
            index: -self.index,
            winding: WindingAccumulator {
                total_phase: -self.winding.total_phase,
                ..self.winding
            },
            events,
            trace,
            clearance: self.clearance,
            max_drift: self.max_drift,
            first: self.last,
            last: self.first,
        }
    }
}

struct Sample {
    u: f64,
    frame: LagrangianFrame,
    s_min: f64,
    small: usize,
    det_q: f64,
    det2: UnitComplex,
}

fn sample(u: f64, frame: &LagrangianFrame, dip: f64) -> Result<Sample> {
    let o = frame
        .orthonormalized()
        .map_err(|_| Error::numerical(u, "frame lost rank"))?;
    let q = o.q_block();
    let (s, _) = singular_pairs(&q);
    Ok(Sample {
        u,
        s_min: s.last().copied().unwrap_or(1.0),
        small: s.iter().filter(|&&x| x < dip).count(),
        det_q: determinant(&q),
        det2: det2(&o)?,
        frame: o,
    })
}

fn grid(u0: f64, u1: f64, cells: usize) -> Vec<f64> {
    let h = (u1 - u0) / cells as f64;
    (0..=cells)
        .map(|i| if i == cells { u1 } else { u0 + h * i as f64 })
        .collect()
}

fn s1_spectrum<P: LagrangianPath + ?Sized>(path: &P, u: f64, k: &IndexSet) -> Result<Spectrum<f64>> {
    let f = path.frame_at(u)?;
    s1_spectrum_of(&f, u, k)
}

fn s1_spectrum_of(frame: &LagrangianFrame, u: f64, k: &IndexSet) -> Result<Spectrum<f64>> {
    let c = to_chart(frame, k).map_err(|_| Error::numerical(u, format!("left chart K = {:?}", k.one_based())))?;
    sym_eig(&c.s1())
}

fn s1_at<P: LagrangianPath + ?Sized>(path: &P, u: f64, k: &IndexSet) -> Result<RealMatrix> {
    let f = path.frame_at(u)?;
    Ok(to_chart(&f, k)
        .map_err(|_| Error::numerical(u, format!("left chart K = {:?}", k.one_based())))?
        .s1())
}

/// Side of zero, with zero itself counted as positive.
fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// Chart containing the path on the whole bracket, tried with the estimated
/// intersection size first.
fn bracket_chart(samples: &[Sample], lo: usize, hi: usize, n: usize) -> Result<IndexSet> {
    let center = (lo..=hi)
        .min_by(|&a, &b| samples[a].s_min.total_cmp(&samples[b].s_min))
        .expect("non-empty bracket");
    let frame = &samples[center].frame;
    let (s, _) = singular_pairs(&frame.q_block());
    let estimate = s.iter().filter(|&&x| x < 0.5).count().max(1);
    let mut order = vec![estimate];
    order.extend((1..=n).filter(|&k| k != estimate));
    let mut best: Option<(IndexSet, f64)> = None;
    for k in order {
        let chart = select_chart_with(frame, k)?;
        let mut margin = f64::INFINITY;
        for smp in &samples[lo..=hi] {
            margin = margin.min(chart_margin(&smp.frame, &chart)?);
        }
        if margin >= MIN_CHART_MARGIN {
            return Ok(chart);
        }
        if best.as_ref().map_or(true, |(_, m)| margin > *m) {
            best = Some((chart, margin));
        }
    }
    match best {
        Some((chart, m)) if m > 0.0 => Ok(chart),
        _ => Err(Error::numerical(samples[center].u, "no chart covers the crossing bracket")),
    }
}

/// Root of the `idx`-th ascending eigenvalue of `S₁` between `lo` and `hi`.
fn bisect<P: LagrangianPath + ?Sized>(path: &P, k: &IndexSet, idx: usize, mut lo: f64, mut hi: f64, s_lo: i8) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
        let v = s1_spectrum(path, mid, k)?.values[idx];
        if sign(v) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

struct Root {
    u: f64,
    /// `+1` for a downward zero-crossing.
    direction: i64,
}

fn bracket_roots<P: LagrangianPath + ?Sized>(path: &P, samples: &[Sample], lo: usize, hi: usize, k: &IndexSet) -> Result<Vec<Root>> {
    let spectra = samples[lo..=hi]
        .iter()
        .map(|s| s1_spectrum_of(&s.frame, s.u, k))
        .collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for j in 0..spectra.len() - 1 {
        let (a, b) = (&spectra[j].values, &spectra[j + 1].values);
        for idx in 0..a.len() {
            let (sa, sb) = (sign(a[idx]), sign(b[idx]));
            if sa == sb {
                continue;
            }
            let (ua, ub) = (samples[lo + j].u, samples[lo + j + 1].u);
            let u = bisect(path, k, idx, ua, ub, sa)?;
            let direction = if sa > 0 { 1 } else { -1 };
            roots.push(Root { u, direction });
        }
    }
    roots.sort_by(|a, b| a.u.total_cmp(&b.u));
    Ok(roots)
}

/// Localizes, certifies and signs the crossings inside one bracket.
fn resolve_bracket<P: LagrangianPath + ?Sized>(
    path: &P,
    samples: &[Sample],
    lo: usize,
    hi: usize,
    settings: &ScanSettings,
    len: f64,
) -> Result<Vec<CrossingEvent>> {
    let n = samples[0].frame.n();
    let chart = bracket_chart(samples, lo, hi, n)?;
    let roots = bracket_roots(path, samples, lo, hi, &chart)?;
    if roots.is_empty() {
        check_no_tangency(path, samples, lo, hi, settings)?;
        return Ok(Vec::new());
    }

    let cell = (samples[hi].u - samples[lo].u) / (hi - lo) as f64;
    let cluster_tol = 1e-8 * len.max(1.0);
    let mut clusters: Vec<Vec<Root>> = Vec::new();
    for r in roots {
        match clusters.last_mut() {
            Some(c) if r.u - c.last().expect("non-empty cluster").u <= cluster_tol => c.push(r),
            _ => clusters.push(vec![r]),
        }
    }

    let mut events = Vec::with_capacity(clusters.len());
    for c in clusters {
        let u_star = c.iter().map(|r| r.u).sum::<f64>() / c.len() as f64;
        let spread = c.last().expect("non-empty").u - c[0].u;
        let f = path.frame_at(u_star)?;
        let s1 = to_chart(&f, &chart)
            .map_err(|_| Error::numerical(u_star, "crossing outside its chart"))?
            .s1();
        let spec = sym_eig(&s1)?;

        let (d_lo, d_hi) = path.domain();
        let h = (1e-5 * len.max(1.0)).min(0.25 * cell);
        let (ua, ub) = ((u_star - h).max(d_lo), (u_star + h).min(d_hi));
        let deriv = (&s1_at(path, ub, &chart)? - &s1_at(path, ua, &chart)?).scale(1.0 / (ub - ua));

        let threshold = settings.tol * s1.norm_max().max(1.0) + 2.0 * spread * deriv.norm_fro();
        let kernel: Vec<usize> = (0..spec.values.len())
            .filter(|&i| spec.values[i].abs() <= threshold)
            .collect();
        if kernel.len() != c.len() {
            return Err(Error::numerical(
                u_star,
                format!(
                    "kernel dimension {} of S₁ disagrees with {} eigenvalue zero-crossings",
                    kernel.len(),
                    c.len()
                ),
            ));
        }
        let all: Vec<usize> = (0..s1.rows()).collect();
        let v = spec.vectors.select(&all, &kernel);
        let form = v.tr_mul(&deriv.matmul(&v)).symmetrized();
        let slopes = sym_eig(&form)?.values;
        let floor = 1e-6 * deriv.norm_max().max(1.0);
        if let Some(s) = slopes.iter().find(|s| s.abs() < floor) {
            return Err(Error::numerical(u_star, format!("crossing is not transversal (slope {s:.3e})")));
        }
        let signs: Vec<i64> = slopes.iter().map(|&s| if s < 0.0 { 1 } else { -1 }).collect();
        let contribution: i64 = signs.iter().sum();
        let counted: i64 = c.iter().map(|r| r.direction).sum();
        if contribution != counted {
            return Err(Error::numerical(
                u_star,
                format!("crossing form signature {contribution} disagrees with eigenvalue count {counted}"),
            ));
        }
        events.push(CrossingEvent {
            u_star,
            multiplicity: kernel.len(),
            contribution,
            signs,
            chart: chart.clone(),
            slope_estimates: slopes,
        });
    }
    Ok(events)
}

/// A flagged bracket without a sign change must stay clear of `σ` on a
/// finer sampling, otherwise the path touches the train tangentially.
fn check_no_tangency<P: LagrangianPath + ?Sized>(path: &P, samples: &[Sample], lo: usize, hi: usize, settings: &ScanSettings) -> Result<()> {
    for j in lo..hi {
        let (ua, ub) = (samples[j].u, samples[j + 1].u);
        let us: Vec<f64> = (1..TANGENCY_SUBSAMPLES)
            .map(|i| ua + (ub - ua) * i as f64 / TANGENCY_SUBSAMPLES as f64)
            .collect();
        for f in path.frames_on(&us)?.iter().zip(&us) {
            let s = sample(*f.1, f.0, settings.dip())?;
            if s.s_min < settings.dip() {
                return Err(Error::numerical(s.u, "path touches the train without crossing it"));
            }
        }
    }
    Ok(())
}

/// Coarse scan, crossing localization and `Det²` winding in one pass.
pub fn scan_path<P: LagrangianPath + ?Sized>(path: &P, settings: &ScanSettings) -> Result<PathScan> {
    settings.validate()?;
    let (u0, u1) = path.domain();
    let us = grid(u0, u1, settings.grid);
    let frames = path.frames_on(&us)?;
    let dip = settings.dip();
    let samples = us
        .iter()
        .zip(&frames)
        .map(|(&u, f)| sample(u, f, dip))
        .collect::<Result<Vec<_>>>()?;
    drop(frames);

    for s in [&samples[0], &samples[samples.len() - 1]] {
        if s.s_min < dip {
            return Err(Error::EndpointDegenerate { u: s.u, dim: s.small });
        }
    }

    let mut winding = WindingAccumulator::new();
    let mut trace = PhaseTrace::new();
    let dets: Vec<(f64, UnitComplex)> = samples.iter().map(|s| (s.u, s.det2)).collect();
    accumulate(path, &dets, &mut winding, &mut trace)?;

    let cells = samples.len() - 1;
    let mut flagged = vec![false; cells];
    for (i, flag) in flagged.iter_mut().enumerate() {
        let (a, b) = (&samples[i], &samples[i + 1]);
        let low = a.s_min.min(b.s_min);
        *flag = low < dip || sign(a.det_q) != sign(b.det_q) || low <= 2.0 * a.frame.gap(&b.frame)?;
    }

    let len = u1 - u0;
    let mut events = Vec::new();
    let mut inside = vec![false; samples.len()];
    let mut i = 0;
    while i < cells {
        if !flagged[i] {
            i += 1;
            continue;
        }
        let lo = i;
        while i < cells && flagged[i] {
            i += 1;
        }
        let hi = i;
        inside[lo..=hi].iter_mut().for_each(|x| *x = true);
        events.extend(resolve_bracket(path, &samples, lo, hi, settings, len)?);
    }

    let clearance = samples
        .iter()
        .zip(&inside)
        .filter(|(_, &ins)| !ins)
        .map(|(s, _)| s.s_min)
        .min_by(f64::total_cmp);
    for w in events.windows(2) {
        if w[1].u_star - w[0].u_star <= 1e-8 * len.max(1.0) {
            return Err(Error::numerical(w[0].u_star, "two crossings closer than the resolution"));
        }
    }
    let index = events.iter().map(|e| e.contribution).sum();
    log::debug!(
        "scanned {:?} over [{u0}, {u1}]: {} events, index {index}, winding {:.4}",
        path.kind(),
        events.len(),
        winding.winding()
    );
    let mut samples = samples;
    let last = samples.pop().map(|s| s.frame);
    let first = samples.into_iter().next().map(|s| s.frame);
    Ok(PathScan {
        kind: path.kind(),
        domain: (u0, u1),
        events,
        index,
        winding,
        trace,
        clearance,
        max_drift: path.max_drift(),
        first,
        last,
    })
}

/// Crossings of the path with the train of `σ`, sorted by parameter.
pub fn detect_crossings<P: LagrangianPath + ?Sized>(path: &P, settings: &ScanSettings) -> Result<Vec<CrossingEvent>> {
    scan_path(path, settings).map(|s| s.events)
}

/// Intersection index of a path with endpoints off the train.
pub fn path_index<P: LagrangianPath + ?Sized>(path: &P, settings: &ScanSettings) -> Result<i64> {
    scan_path(path, settings).map(|s| s.index)
}

/// Outcome of [`crossing_slope_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub passed: bool,
    pub slopes: Vec<f64>,
    pub diagnostic: Option<String>,
}

/// Re-derives the slopes of the vanishing `S₁` eigenvalues at an event by
/// central differences and checks the Jacobi bound `slope ≤ -1 + slack`.
pub fn crossing_slope_check<P: LagrangianPath + ?Sized>(event: &CrossingEvent, path: &P, slack: f64) -> SlopeCheck {
    let fail = |msg: String| SlopeCheck {
        passed: false,
        slopes: Vec::new(),
        diagnostic: Some(msg),
    };
    let (d_lo, d_hi) = path.domain();
    let h = 1e-5 * (d_hi - d_lo).max(1.0);
    let u = event.u_star;
    let (ua, ub) = ((u - h).max(d_lo), (u + h).min(d_hi));
    let k = &event.chart;
    let mats = (s1_at(path, u, k), s1_at(path, ua, k), s1_at(path, ub, k));
    let (s1, sa, sb) = match mats {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return fail(e.to_string()),
    };
    let spec = match sym_eig(&s1) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    // kernel directions: the `multiplicity` eigenvalues closest to zero
    let mut order: Vec<usize> = (0..spec.values.len()).collect();
    order.sort_by(|&a, &b| spec.values[a].abs().total_cmp(&spec.values[b].abs()));
    order.truncate(event.multiplicity);
    let all: Vec<usize> = (0..s1.rows()).collect();
    let v = spec.vectors.select(&all, &order);
    let deriv = (&sb - &sa).scale(1.0 / (ub - ua));
    let slopes = match sym_eig(&v.tr_mul(&deriv.matmul(&v)).symmetrized()) {
        Ok(s) => s.values,
        Err(e) => return fail(e.to_string()),
    };
    let bound = -1.0 + slack;
    let worst = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let passed = worst <= bound;
    SlopeCheck {
        passed,
        diagnostic: (!passed).then(|| format!("slope {worst:.6} at u = {u} exceeds {bound}")),
        slopes,
    }
}
