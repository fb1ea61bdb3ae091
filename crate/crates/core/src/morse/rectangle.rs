use serde::Serialize;

use super::MorseSettings;
use crate::error::{Error, Result};
use crate::jacobiflow::{lambda_lower_bound, sigma_lambda, CurvatureProfile};
use crate::lagrangian::sigma_distance;
use crate::maslov::{
    crossing_slope_check, loop_index_from_scans, scan_path, CrossingEvent, JacobiLambdaEdge, JacobiTimeEdge, PathScan,
    SegmentPath, SlopeCheck, SLOPE_SLACK,
};
use crate::numkernel::singular_pairs;

/// `λ` samples used to certify that `σ_λ(a′)` stays off the train.
const A_PRIME_LAMBDA_SAMPLES: usize = 33;

/// The homological rectangle `[a′, b′] x [λ₀, 0]` with its corner shifts.
#[derive(Clone, Debug, Serialize)]
pub struct RectangleSpec {
    pub profile: CurvatureProfile,
    pub a: f64,
    pub b: f64,
    pub lambda0: f64,
    /// Smallest eigenvalue of `R` over `[a, b]`; `λ₀` must lie below it.
    pub curvature_floor: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub lambda_prime: f64,
    /// `dim(σ₀(b) ∩ σ)`; nonzero when `b` itself is conjugate to `a`.
    pub nullity_at_b: usize,
    /// Scan of `μ ↦ σ_μ(b)` upwards from `λ₀`, to `0` or to `λ′` when `b`
    /// is conjugate.
    #[serde(skip)]
    right_edge: Option<PathScan>,
}

impl RectangleSpec {
    /// Upper end of the `λ`-edge actually scanned.
    pub fn right_edge_top(&self) -> f64 {
        if self.nullity_at_b > 0 {
            self.lambda_prime
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.profile.a();
        let b = self.profile.b();
        if !(a < self.a_prime && self.a_prime < self.b_prime && self.b_prime <= b) {
            return Err(Error::InvalidSpec(format!(
                "need a < a′ < b′ ≤ b, got a = {a}, a′ = {}, b′ = {}, b = {b}",
                self.a_prime, self.b_prime
            )));
        }
        if !(self.lambda0 < self.lambda_prime && self.lambda_prime < 0.0) {
            return Err(Error::InvalidSpec(format!(
                "need λ₀ < λ′ < 0, got λ₀ = {}, λ′ = {}",
                self.lambda0, self.lambda_prime
            )));
        }
        if self.lambda0 >= self.curvature_floor {
            return Err(Error::InvalidSpec(format!(
                "λ₀ = {} is not below the smallest curvature eigenvalue {}",
                self.lambda0, self.curvature_floor
            )));
        }
        Ok(())
    }
}

fn s_min(profile: &CurvatureProfile, lambda: f64, t: f64, settings: &MorseSettings) -> Result<f64> {
    sigma_distance(&sigma_lambda(profile, lambda, t, &settings.flow)?)
}

fn pick_lambda0(profile: &CurvatureProfile, settings: &MorseSettings, lambda0: Option<f64>) -> Result<(f64, f64)> {
    let floor = profile.min_eigenvalue(16 * settings.flow.steps);
    match lambda0 {
        Some(l) if !(l < floor && l < 0.0) => Err(Error::InvalidSpec(format!(
            "λ₀ = {l} must be negative and below the smallest curvature eigenvalue {floor}"
        ))),
        Some(l) => Ok((l, floor)),
        None => {
            let bound = lambda_lower_bound(profile, settings.lambda_margin, &settings.flow)?;
            Ok((bound.min(-settings.lambda_margin), floor))
        }
    }
}

/// First coarse time after `a` where `σ_λ` is off the train for every
/// sampled `λ ∈ [λ₀, 0]`.
fn pick_a_prime(profile: &CurvatureProfile, lambda0: f64, settings: &MorseSettings) -> Result<f64> {
    let dip = settings.scan.dip();
    let h = profile.len() / settings.scan.grid as f64;
    let lambdas: Vec<f64> = (0..A_PRIME_LAMBDA_SAMPLES)
        .map(|i| lambda0 * (1.0 - i as f64 / (A_PRIME_LAMBDA_SAMPLES - 1) as f64))
        .collect();
    for j in 1..settings.scan.grid {
        let t = profile.a() + h * j as f64;
        let mut clear = true;
        for &l in &lambdas {
            if s_min(profile, l, t, settings)? <= dip {
                clear = false;
                break;
            }
        }
        if clear {
            return Ok(t);
        }
    }
    Err(Error::InvalidSpec("no a′ keeps σ_λ(a′) off the train for all sampled λ".into()))
}

struct BSide {
    b_prime: f64,
    nullity: usize,
    lambda_prime: Option<f64>,
}

/// Shifts `b` and `0` off a conjugate value at `b`: the first coarse time
/// before `b` and the first coarse `λ` below `0` that leave the train.
fn b_side(profile: &CurvatureProfile, lambda0: f64, a_prime: f64, settings: &MorseSettings) -> Result<BSide> {
    let dip = settings.scan.dip();
    let b = profile.b();
    let at_b = sigma_lambda(profile, 0.0, b, &settings.flow)?.orthonormalized()?;
    let nullity = singular_pairs(&at_b.q_block()).0.iter().filter(|&&s| s < dip).count();
    if nullity == 0 {
        return Ok(BSide {
            b_prime: b,
            nullity,
            lambda_prime: None,
        });
    }
    let grid = settings.scan.grid;
    let ht = profile.len() / grid as f64;
    let b_prime = (1..grid)
        .map(|k| b - ht * k as f64)
        .take_while(|&t| t > a_prime)
        .find(|&t| s_min(profile, 0.0, t, settings).map_or(false, |s| s > dip))
        .ok_or_else(|| Error::InvalidSpec("no b′ below b leaves the train".into()))?;
    let hl = -lambda0 / grid as f64;
    let lambda_prime = (1..grid)
        .map(|k| -hl * k as f64)
        .find(|&l| s_min(profile, l, b, settings).map_or(false, |s| s > dip))
        .ok_or_else(|| Error::InvalidSpec("no λ′ below 0 leaves the train".into()))?;
    Ok(BSide {
        b_prime,
        nullity,
        lambda_prime: Some(lambda_prime),
    })
}

/// Builds the rectangle for `profile`: `λ₀` (default: the curvature floor
/// minus the margin, and at most `-margin`), `a′`, the corner at `b`, and
/// the scan of the `λ`-edge.
pub fn rectangle_spec(profile: &CurvatureProfile, settings: &MorseSettings, lambda0: Option<f64>) -> Result<RectangleSpec> {
    settings.validate()?;
    let (lambda0, floor) = pick_lambda0(profile, settings, lambda0)?;
    let a_prime = pick_a_prime(profile, lambda0, settings)?;
    let side = b_side(profile, lambda0, a_prime, settings)?;
    let top = side.lambda_prime.unwrap_or(0.0);
    let edge = JacobiLambdaEdge::new(profile, profile.b(), lambda0, top, &settings.flow)?;
    let right = scan_path(&edge, &settings.scan)?;
    let lambda_prime = match side.lambda_prime {
        Some(l) => l,
        None => right
            .events
            .iter()
            .map(|e| e.u_star.abs())
            .min_by(f64::total_cmp)
            .map_or(0.5 * lambda0, |m| -0.5 * m),
    };
    let spec = RectangleSpec {
        profile: profile.clone(),
        a: profile.a(),
        b: profile.b(),
        lambda0,
        curvature_floor: floor,
        a_prime,
        b_prime: side.b_prime,
        lambda_prime,
        nullity_at_b: side.nullity,
        right_edge: Some(right),
    };
    spec.validate()?;
    log::info!(
        "rectangle a′ = {}, b′ = {}, λ₀ = {}, λ′ = {}, nullity at b = {}",
        spec.a_prime,
        spec.b_prime,
        spec.lambda0,
        spec.lambda_prime,
        spec.nullity_at_b
    );
    Ok(spec)
}

/// Conjugate values of `a` in `(a, b)`, found on the `λ = 0` time edge.
#[derive(Clone, Debug, Serialize)]
pub struct ConjugatePoints {
    pub events: Vec<CrossingEvent>,
    /// Sum of multiplicities.
    pub total: usize,
    pub a_prime: f64,
    pub b_prime: f64,
    pub nullity_at_b: usize,
    pub slope_checks: Vec<SlopeCheck>,
    pub max_drift: f64,
}

fn conjugate_on(profile: &CurvatureProfile, a_prime: f64, b_prime: f64, nullity: usize, settings: &MorseSettings) -> Result<ConjugatePoints> {
    let edge = JacobiTimeEdge::new(profile, 0.0, a_prime, b_prime, &settings.flow)?;
    let scan = scan_path(&edge, &settings.scan)?;
    let slope_checks: Vec<SlopeCheck> = scan
        .events
        .iter()
        .map(|e| crossing_slope_check(e, &edge, SLOPE_SLACK))
        .collect();
    if let Some((e, c)) = scan.events.iter().zip(&slope_checks).find(|(_, c)| !c.passed) {
        return Err(Error::numerical(
            e.u_star,
            c.diagnostic.clone().unwrap_or_else(|| "slope check failed".into()),
        ));
    }
    Ok(ConjugatePoints {
        total: scan.total_multiplicity(),
        events: scan.events,
        a_prime,
        b_prime,
        nullity_at_b: nullity,
        slope_checks,
        max_drift: scan.max_drift,
    })
}

/// Conjugate points of `a` in `(a, b)` with multiplicities.
pub fn conjugate_points(profile: &CurvatureProfile, settings: &MorseSettings) -> Result<ConjugatePoints> {
    settings.validate()?;
    let (lambda0, _) = pick_lambda0(profile, settings, None)?;
    let a_prime = pick_a_prime(profile, lambda0, settings)?;
    let side = b_side(profile, lambda0, a_prime, settings)?;
    conjugate_on(profile, a_prime, side.b_prime, side.nullity, settings)
}

/// Conjugate points on the top edge of an existing rectangle.
pub fn conjugate_points_in(spec: &RectangleSpec, settings: &MorseSettings) -> Result<ConjugatePoints> {
    conjugate_on(&spec.profile, spec.a_prime, spec.b_prime, spec.nullity_at_b, settings)
}

/// Negative Dirichlet eigenvalues, read as crossings of `μ ↦ σ_μ(b)`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralCount {
    /// Crossing parameters: the eigenvalues below `λ′` (or `0`).
    pub events: Vec<CrossingEvent>,
    /// Sum of multiplicities.
    pub total: usize,
    /// Signed intersection index of the upward `λ`-edge.
    pub signed_index: i64,
    /// Whether every crossing came out positive.
    pub uniform_sign: bool,
    pub lambda0: f64,
    pub lambda_top: f64,
    pub max_drift: f64,
}

impl SpectralCount {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.events
            .iter()
            .flat_map(|e| std::iter::repeat(e.u_star).take(e.multiplicity))
            .collect()
    }
}

fn right_scan(spec: &RectangleSpec, settings: &MorseSettings) -> Result<PathScan> {
    match &spec.right_edge {
        Some(s) => Ok(s.clone()),
        None => {
            let edge = JacobiLambdaEdge::new(&spec.profile, spec.b, spec.lambda0, spec.right_edge_top(), &settings.flow)?;
            scan_path(&edge, &settings.scan)
        }
    }
}

/// Number of negative Dirichlet eigenvalues of `-X'' + R X = λX` with
/// multiplicity, from the `λ`-edge of the rectangle.
pub fn spectral_count(spec: &RectangleSpec, settings: &MorseSettings) -> Result<SpectralCount> {
    spec.validate()?;
    let scan = right_scan(spec, settings)?;
    Ok(SpectralCount {
        total: scan.total_multiplicity(),
        signed_index: scan.index,
        uniform_sign: scan.events.iter().all(|e| e.contribution == e.multiplicity as i64),
        events: scan.events,
        lambda0: spec.lambda0,
        lambda_top: spec.right_edge_top(),
        max_drift: scan.max_drift,
    })
}

/// One side of the rectangle loop, oriented as traversed.
#[derive(Clone, Debug, Serialize)]
pub struct RectangleEdge {
    pub name: &'static str,
    pub scan: PathScan,
}

#[derive(Clone, Debug, Serialize)]
pub struct RectangleReport {
    pub spec: RectangleSpec,
    /// Intersection number of the closed loop; zero certifies the count
    /// equality.
    pub residual: i64,
    /// `Det²` winding of the loop in turns.
    pub winding: f64,
    pub edges: Vec<RectangleEdge>,
}

impl RectangleReport {
    pub fn max_drift(&self) -> f64 {
        self.edges.iter().map(|e| e.scan.max_drift).fold(0.0, f64::max)
    }
}

fn require_clear(name: &str, scan: &PathScan) -> Result<()> {
    match scan.events.first() {
        None => Ok(()),
        Some(e) => Err(Error::numerical(e.u_star, format!("{name} edge meets the train"))),
    }
}

/// Intersection number of the rectangle loop: the `λ = 0` edge from `a′` to
/// `b′`, the corner to `(b, λ′)` when `b` is conjugate, the `λ`-edge down to
/// `λ₀`, the bottom edge back to `a′`, and the left side up to `λ = 0`.
pub fn rectangle_check(spec: &RectangleSpec, settings: &MorseSettings) -> Result<RectangleReport> {
    settings.validate()?;
    spec.validate()?;
    let p = &spec.profile;
    let flow = &settings.flow;
    let scan = &settings.scan;

    let mut names = vec!["top"];
    let mut scans = vec![scan_path(&JacobiTimeEdge::new(p, 0.0, spec.a_prime, spec.b_prime, flow)?, scan)?];
    if spec.nullity_at_b > 0 {
        let corner = scan_path(
            &SegmentPath::new(p, (spec.b_prime, 0.0), (spec.b, spec.lambda_prime), flow)?,
            scan,
        )?;
        require_clear("corner", &corner)?;
        names.push("corner");
        scans.push(corner);
    }
    names.push("right");
    scans.push(right_scan(spec, settings)?.reversed());

    let bottom = scan_path(&JacobiTimeEdge::new(p, spec.lambda0, spec.a_prime, spec.b, flow)?, scan)?;
    require_clear("bottom", &bottom)?;
    names.push("bottom");
    scans.push(bottom.reversed());

    let left = scan_path(&JacobiLambdaEdge::new(p, spec.a_prime, spec.lambda0, 0.0, flow)?, scan)?;
    require_clear("left", &left)?;
    names.push("left");
    scans.push(left);

    let l = loop_index_from_scans(scans)?;
    Ok(RectangleReport {
        spec: spec.clone(),
        residual: l.intersection,
        winding: l.winding,
        edges: names
            .into_iter()
            .zip(l.edges)
            .map(|(name, scan)| RectangleEdge { name, scan })
            .collect(),
    })
}
