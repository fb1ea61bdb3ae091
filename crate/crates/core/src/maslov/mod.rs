//! Winding of `Det²` along paths in the Lagrangian Grassmannian, crossings
//! with the train of `σ`, and path and loop indices.

mod crossing;
mod index;
mod path;
mod winding;

pub use crossing::{
    crossing_slope_check, detect_crossings, path_index, scan_path, CrossingEvent, PathScan, ScanSettings, SlopeCheck,
    SLOPE_SLACK,
};
pub use index::{loop_index, loop_index_from_scans, LoopIndex, LOOP_CLOSURE_TOL, WINDING_INTEGRALITY_TOL};
pub use path::{EdgeKind, FnPath, JacobiLambdaEdge, JacobiTimeEdge, LagrangianPath, Reversed, RotationPath, SegmentPath};
pub use winding::{winding_det2, winding_with_trace, PhaseTrace, WindingAccumulator, MAX_BISECTION_DEPTH, MAX_STEP_PHASE};
