//! The Morse index three ways: conjugate points on the `λ = 0` edge,
//! negative Dirichlet eigenvalues on the `t = b` edge, and the inertia of a
//! discretized index form, tied together by the rectangle loop.

mod fd;
mod rectangle;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobiflow::FlowSettings;
use crate::maslov::ScanSettings;

pub use fd::{hessian_index_fd, hessian_matrix_fd, sl_eigs_fd, sl_eigs_fd_below, sl_matrix_fd, MIN_MESH};
pub use rectangle::{
    conjugate_points, conjugate_points_in, rectangle_check, rectangle_spec, spectral_count, ConjugatePoints,
    RectangleEdge, RectangleReport, RectangleSpec, SpectralCount,
};
pub use report::{morse_report, Diagnostics, EdgeSummary, IndexReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseSettings {
    pub flow: FlowSettings,
    pub scan: ScanSettings,
    /// Elements for the discretized index form and Sturm–Liouville problem.
    pub mesh: usize,
    /// Distance of the default `λ₀` below the curvature floor.
    pub lambda_margin: f64,
}

impl Default for MorseSettings {
    fn default() -> Self {
        MorseSettings {
            flow: FlowSettings::default(),
            scan: ScanSettings::default(),
            mesh: 512,
            lambda_margin: 1.0,
        }
    }
}

impl MorseSettings {
    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        self.scan.validate()?;
        if self.mesh < MIN_MESH {
            return Err(Error::InvalidInput(format!("mesh {} is below the minimum of {MIN_MESH}", self.mesh)));
        }
        if !(self.lambda_margin > 0.0 && self.lambda_margin.is_finite()) {
            return Err(Error::InvalidInput("lambda_margin must be positive".into()));
        }
        Ok(())
    }
}
