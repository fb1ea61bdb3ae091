use num_complex::Complex;
use proptest::prelude::*;

use maslov_core::lagrangian::{
    det2, from_chart, intersection_dim, is_lagrangian, rotate, select_chart, to_chart, ChartCoords, IndexSet,
    LagrangianFrame,
};
use maslov_core::RealMatrix;

fn symmetric(n: usize) -> impl Strategy<Value = RealMatrix> {
    proptest::collection::vec(-4.0f64..4.0, n * n)
        .prop_map(move |v| RealMatrix::from_row_major(n, n, v).unwrap().symmetrized())
}

fn chart_point() -> impl Strategy<Value = ChartCoords> {
    (1usize..=4)
        .prop_flat_map(|n| (symmetric(n), proptest::collection::vec(any::<bool>(), n)))
        .prop_map(|(s, mask)| {
            let k = IndexSet::new(mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect());
            ChartCoords::new(k, s).unwrap()
        })
}

proptest! {
    #[test]
    fn chart_frames_are_lagrangian(c in chart_point()) {
        let f = from_chart(&c);
        prop_assert!(is_lagrangian(f.matrix(), 1e-10));
        let back = to_chart(&f, &c.k).unwrap();
        prop_assert!((&back.s - &c.s).norm_max() < 1e-9);
    }

    #[test]
    fn det2_is_a_frame_invariant(c in chart_point(), t in -3.0f64..3.0) {
        let f = from_chart(&c);
        let d = det2(&f).unwrap().value();
        prop_assert!((d.norm() - 1.0).abs() < 1e-12);
        // a different basis of the same subspace
        let o = f.orthonormalized().unwrap();
        prop_assert!((det2(&o).unwrap().value() - d).norm() < 1e-9);
        // the full rotation multiplies Det² by e^{2int}
        let n = f.n() as f64;
        let turned = det2(&rotate(&f, &IndexSet::full(f.n()), t)).unwrap().value();
        prop_assert!((turned - d * Complex::from_polar(1.0, 2.0 * n * t)).norm() < 1e-9);
    }

    #[test]
    fn selected_chart_sees_the_intersection(c in chart_point()) {
        let f = from_chart(&c);
        let k = select_chart(&f).unwrap();
        prop_assert_eq!(k.len(), intersection_dim(&f, 1e-8).unwrap());
        prop_assert!(to_chart(&f, &k).is_ok());
    }

    #[test]
    fn graph_frames_miss_sigma(s in symmetric(3)) {
        let f = LagrangianFrame::graph(&s).unwrap();
        prop_assert_eq!(intersection_dim(&f, 1e-8).unwrap(), 0);
    }
}
