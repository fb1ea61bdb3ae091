use serde::Serialize;

use super::crossing::{scan_path, PathScan, ScanSettings};
use super::winding::WindingAccumulator;
use super::LagrangianPath;
use crate::error::{Error, Result};
use crate::lagrangian::det2;

/// Consecutive edges must meet within this subspace gap.
pub const LOOP_CLOSURE_TOL: f64 = 1e-6;
/// Largest distance of a closed-loop winding from an integer.
pub const WINDING_INTEGRALITY_TOL: f64 = 0.05;

/// Intersection number and `Det²` degree of a closed loop.
///
/// Crossings are signed `-sign(d/du S₁)`, which makes every crossing of a
/// Jacobi time edge positive, while `Det²` turns backwards along that flow.
/// The two integers therefore satisfy `intersection = -maslov`.
#[derive(Clone, Debug, Serialize)]
pub struct LoopIndex {
    pub intersection: i64,
    /// Unrounded `Det²` winding in turns.
    pub winding: f64,
    /// Rounded winding: the Maslov index `α`.
    pub maslov: i64,
    pub edges: Vec<PathScan>,
}

/// Intersection index and winding of the closed loop formed by the edges
/// in order.
pub fn loop_index(edges: &[&dyn LagrangianPath], settings: &ScanSettings) -> Result<LoopIndex> {
    if edges.is_empty() {
        return Err(Error::InvalidLoop("a loop needs at least one edge".into()));
    }
    let scans = edges
        .iter()
        .map(|e| scan_path(*e, settings))
        .collect::<Result<Vec<_>>>()?;
    loop_index_from_scans(scans)
}

/// [`loop_index`] for edges that were already scanned, in loop order and
/// orientation.
pub fn loop_index_from_scans(scans: Vec<PathScan>) -> Result<LoopIndex> {
    if scans.is_empty() {
        return Err(Error::InvalidLoop("a loop needs at least one edge".into()));
    }
    let mut total = WindingAccumulator::new();
    for (i, scan) in scans.iter().enumerate() {
        total.append(&scan.winding);
        let next = &scans[(i + 1) % scans.len()];
        let (end, start) = match (&scan.last, &next.first) {
            (Some(e), Some(s)) => (e, s),
            _ => return Err(Error::InvalidLoop(format!("edge {i} has no samples"))),
        };
        let gap = end.gap(start)?;
        if gap >= LOOP_CLOSURE_TOL {
            return Err(Error::InvalidLoop(format!(
                "edge {i} ends {gap:.3e} away from where edge {} starts",
                (i + 1) % scans.len()
            )));
        }
        // frames of the same subspace may still differ in basis orientation
        total.push(det2(start)?.phase_from(det2(end)?));
    }

    let winding = total.winding();
    let maslov = winding.round();
    if (winding - maslov).abs() > WINDING_INTEGRALITY_TOL {
        return Err(Error::numerical(0.0, format!("closed-loop winding {winding:.4} is not an integer")));
    }
    let maslov = maslov as i64;
    let intersection: i64 = scans.iter().map(|s| s.index).sum();
    if intersection != -maslov {
        return Err(Error::numerical(
            0.0,
            format!("intersection number {intersection} disagrees with Det² winding {maslov}"),
        ));
    }
    Ok(LoopIndex {
        intersection,
        winding,
        maslov,
        edges: scans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::LagrangianFrame;
    use crate::maslov::{FnPath, RotationPath};
    use crate::RealMatrix;

    #[test]
    fn constant_loop() {
        let g = LagrangianFrame::graph(&RealMatrix::from_diagonal(&[1.0, -1.0])).unwrap();
        let p = FnPath::new(0.0, 1.0, |_| Ok(g.clone())).unwrap();
        let l = loop_index(&[&p], &ScanSettings::default()).unwrap();
        assert_eq!((l.intersection, l.maslov), (0, 0));
    }

    #[test]
    fn rotation_loop_has_index_n() {
        for n in 1..=3 {
            let s = RealMatrix::from_diagonal(&(1..=n).map(|i| i as f64).collect::<Vec<_>>());
            let r = RotationPath::graph_loop(&s).unwrap();
            let l = loop_index(&[&r], &ScanSettings::default()).unwrap();
            assert_eq!(l.maslov, n as i64);
            assert_eq!(l.intersection, -(n as i64));
            assert!((l.winding - n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn reversed_scan_matches_rescan() {
        use crate::maslov::{scan_path, Reversed};
        let s = RealMatrix::from_diagonal(&[1.0, 3.0]);
        let r = RotationPath::new(LagrangianFrame::graph(&s).unwrap(), crate::lagrangian::IndexSet::full(2), 0.2, 2.9).unwrap();
        let set = ScanSettings::default();
        let back = scan_path(&Reversed(&r), &set).unwrap();
        let flipped = scan_path(&r, &set).unwrap().reversed();
        assert_eq!(back.index, flipped.index);
        assert!((back.winding.total_phase - flipped.winding.total_phase).abs() < 1e-9);
        for (x, y) in back.events.iter().zip(&flipped.events) {
            assert!((x.u_star - y.u_star).abs() < 1e-9);
            assert_eq!(x.signs, y.signs);
        }
    }

    #[test]
    fn open_chain_is_rejected() {
        let s = RealMatrix::from_diagonal(&[1.0]);
        let r = RotationPath::new(LagrangianFrame::graph(&s).unwrap(), crate::lagrangian::IndexSet::full(1), 0.0, 1.0).unwrap();
        assert!(matches!(loop_index(&[&r], &ScanSettings::default()), Err(Error::InvalidLoop(_))));
    }
}
