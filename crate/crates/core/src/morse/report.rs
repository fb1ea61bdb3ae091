use serde::Serialize;

use super::{
    conjugate_points_in, hessian_index_fd, rectangle_check, rectangle_spec, sl_eigs_fd_below, spectral_count, MorseSettings,
};
use crate::error::{Error, Result};
use crate::jacobiflow::CurvatureProfile;
use crate::maslov::{CrossingEvent, SlopeCheck};

/// Per-edge summary of the rectangle loop.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeSummary {
    pub name: String,
    pub domain: (f64, f64),
    pub index: i64,
    pub events: usize,
    pub winding: f64,
    pub clearance: Option<f64>,
    pub max_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub max_drift: f64,
    pub slope_checks: Vec<SlopeCheck>,
    pub lambda_edge_uniform_sign: bool,
    pub loop_winding: f64,
    pub lambda0: f64,
    pub lambda_prime: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub edges: Vec<EdgeSummary>,
    /// Whether the finite-difference negative count matches the spectral
    /// count.
    pub fd_count_agrees: bool,
}

/// The three index computations side by side.
#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub certified: bool,
    pub conjugate_events: Vec<CrossingEvent>,
    pub conjugate_total: usize,
    pub spectral_eigenvalues: Vec<f64>,
    pub spectral_total: usize,
    pub hessian_index: usize,
    pub hessian_index_refined: usize,
    pub hessian_mesh: usize,
    pub fd_negative_eigenvalues: Vec<f64>,
    pub rectangle_residual: i64,
    pub nullity_at_b: usize,
    pub diagnostics: Diagnostics,
}

/// Runs every computation and certifies
/// `conjugate_total = spectral_total = hessian_index` (at meshes `m` and
/// `2m`) with a vanishing rectangle residual.
pub fn morse_report(profile: &CurvatureProfile, settings: &MorseSettings) -> Result<IndexReport> {
    settings.validate()?;
    let spec = rectangle_spec(profile, settings, None)?;
    let conj = conjugate_points_in(&spec, settings)?;
    let spectral = spectral_count(&spec, settings)?;
    let hessian = hessian_index_fd(profile, settings.mesh)?;
    let hessian_refined = hessian_index_fd(profile, 2 * settings.mesh)?;
    let fd = sl_eigs_fd_below(profile, settings.mesh, 0.0)?;
    let rect = rectangle_check(&spec, settings)?;

    let certified = conj.total == spectral.total
        && spectral.total == hessian
        && hessian == hessian_refined
        && rect.residual == 0;
    let edges = rect
        .edges
        .iter()
        .map(|e| EdgeSummary {
            name: e.name.to_string(),
            domain: e.scan.domain,
            index: e.scan.index,
            events: e.scan.events.len(),
            winding: e.scan.winding.winding(),
            clearance: e.scan.clearance,
            max_drift: e.scan.max_drift,
        })
        .collect();
    let report = IndexReport {
        certified,
        conjugate_total: conj.total,
        spectral_eigenvalues: spectral.eigenvalues(),
        spectral_total: spectral.total,
        hessian_index: hessian,
        hessian_index_refined: hessian_refined,
        hessian_mesh: settings.mesh,
        fd_negative_eigenvalues: fd.clone(),
        rectangle_residual: rect.residual,
        nullity_at_b: spec.nullity_at_b,
        diagnostics: Diagnostics {
            max_drift: rect.max_drift().max(conj.max_drift).max(spectral.max_drift),
            slope_checks: conj.slope_checks,
            lambda_edge_uniform_sign: spectral.uniform_sign,
            loop_winding: rect.winding,
            lambda0: spec.lambda0,
            lambda_prime: spec.lambda_prime,
            a_prime: spec.a_prime,
            b_prime: spec.b_prime,
            edges,
            fd_count_agrees: fd.len() == spectral.total,
        },
        conjugate_events: conj.events,
    };
    log::info!(
        "conjugate {}, spectral {}, hessian {}/{}, residual {}",
        report.conjugate_total,
        report.spectral_total,
        report.hessian_index,
        report.hessian_index_refined,
        report.rectangle_residual
    );
    if certified {
        Ok(report)
    } else {
        Err(Error::CertificationFailure(Box::new(report)))
    }
}
