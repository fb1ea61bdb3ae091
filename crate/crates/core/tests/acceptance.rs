//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints a PASS/FAIL line; exits non-zero on any failure.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maslov_core::jacobiflow::{
    fundamental_solution, random_trigonometric_profile, symplectic_residual, CurvatureProfile, FlowSettings,
    ProfileKind, RandomProfileSpec,
};
use maslov_core::lagrangian::{
    chart_flow_formula, chart_margin, det2, from_chart, intersection_dim, rotate, select_chart, to_chart, ChartCoords,
    IndexSet, LagrangianFrame,
};
use maslov_core::maslov::{winding_det2, RotationPath};
use maslov_core::morse::{conjugate_points, morse_report, rectangle_check, rectangle_spec, IndexReport, MorseSettings};
use maslov_core::numkernel::{complex_det, sym_eig, CMatrix};
use maslov_core::RealMatrix;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn named_profiles() -> Vec<(&'static str, CurvatureProfile)> {
    let d = |v: &[f64], a, b| CurvatureProfile::diagonal(v.to_vec(), a, b).unwrap();
    let scalar = |r: f64| RealMatrix::from_diagonal(&[r]);
    let kick = CurvatureProfile::new(
        1,
        0.0,
        4.0,
        ProfileKind::PiecewiseConstant {
            breakpoints: vec![1.0, 3.0],
            pieces: vec![scalar(0.0), scalar(-4.0), scalar(0.0)],
        },
    )
    .unwrap();
    vec![
        ("flat", d(&[0.0], 0.0, 1.0)),
        ("hyperbolic", d(&[1.0], 0.0, 1.0)),
        ("sphere-n1", d(&[-1.0], 0.0, 10.0)),
        ("sphere-like-n2", CurvatureProfile::constant(RealMatrix::identity(2).scale(-1.0), 0.0, 4.0).unwrap()),
        ("two-scale", d(&[-1.0, -4.0], 0.0, 4.0)),
        ("deep-well", d(&[-50.0], 0.0, 1.0)),
        ("conjugate-endpoint", d(&[-1.0], 0.0, PI)),
        ("piecewise-kick", kick),
    ]
}

fn random_profiles() -> Vec<(String, CurvatureProfile)> {
    (0..20)
        .map(|seed| {
            let p = random_trigonometric_profile(seed, &RandomProfileSpec::default()).unwrap();
            (format!("random seed {seed}"), p)
        })
        .collect()
}

/// Everything computed once and shared by the suite-wide criteria.
struct Suite {
    runs: Vec<(String, CurvatureProfile, IndexReport)>,
}

impl Suite {
    fn build() -> Result<Self, String> {
        let settings = MorseSettings::default();
        let mut runs = Vec::new();
        let named = named_profiles().into_iter().map(|(n, p)| (n.to_string(), p));
        for (name, p) in named.chain(random_profiles()) {
            let r = morse_report(&p, &settings).map_err(|e| format!("{name}: {e}"))?;
            runs.push((name, p, r));
        }
        Ok(Suite { runs })
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let p = CurvatureProfile::diagonal(vec![-1.0], 0.0, 10.0).unwrap();
    let settings = MorseSettings {
        mesh: 2048,
        ..MorseSettings::default()
    };
    let r = morse_report(&p, &settings).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(r.certified && r.conjugate_total == 3 && r.spectral_total == 3 && r.hessian_index == 3, || {
        format!("counts {}/{}/{}", r.conjugate_total, r.spectral_total, r.hessian_index)
    })?;
    let mut worst_t: f64 = 0.0;
    for (k, e) in r.conjugate_events.iter().enumerate() {
        worst_t = worst_t.max((e.u_star - (k + 1) as f64 * PI).abs());
    }
    ensure(worst_t < 1e-6, || format!("conjugate time error {worst_t:.2e}"))?;
    ensure(r.fd_negative_eigenvalues.len() == 3, || "FD eigenvalue count".into())?;
    let mut worst_e: f64 = 0.0;
    for (k, v) in r.fd_negative_eigenvalues.iter().enumerate() {
        worst_e = worst_e.max((v - (((k + 1) as f64 * PI / 10.0).powi(2) - 1.0)).abs());
    }
    ensure(worst_e < 1e-3, || format!("FD eigenvalue error {worst_e:.2e}"))?;
    ensure(elapsed < 10.0, || format!("runtime {elapsed:.2} s"))?;
    Ok(format!("counts 3/3/3, time error {worst_t:.1e}, eigenvalue error {worst_e:.1e}, {elapsed:.2} s"))
}

fn criterion_2(suite: &Suite) -> Check {
    let (_, _, r) = suite.runs.iter().find(|(n, _, _)| n == "two-scale").unwrap();
    let mults: Vec<usize> = r.conjugate_events.iter().map(|e| e.multiplicity).collect();
    ensure(mults == [1, 2], || format!("multiplicities {mults:?}"))?;
    let err = (r.conjugate_events[1].u_star - PI).abs();
    ensure(err < 1e-6, || format!("double event at {}", r.conjugate_events[1].u_star))?;
    ensure(r.certified && r.conjugate_total == 3, || format!("total {}", r.conjugate_total))?;
    Ok(format!("multiplicities [1, 2], double event error {err:.1e}, total 3"))
}

fn criterion_3() -> Check {
    let settings = MorseSettings::default();
    for (label, p) in [
        ("R = 0", CurvatureProfile::diagonal(vec![0.0], 0.0, 1.0).unwrap()),
        ("R = 0 (n = 2)", CurvatureProfile::diagonal(vec![0.0, 0.0], 0.0, 1.0).unwrap()),
        ("R = +I", CurvatureProfile::diagonal(vec![1.0], 0.0, 1.0).unwrap()),
        ("R = +I (n = 3)", CurvatureProfile::diagonal(vec![1.0; 3], 0.0, 1.0).unwrap()),
    ] {
        let r = morse_report(&p, &settings).map_err(|e| format!("{label}: {e}"))?;
        ensure(
            r.certified && r.conjugate_total == 0 && r.spectral_total == 0 && r.hessian_index == 0,
            || format!("{label}: nonzero count"),
        )?;
        let spec = rectangle_spec(&p, &settings, None).map_err(|e| e.to_string())?;
        let rect = rectangle_check(&spec, &settings).map_err(|e| e.to_string())?;
        for e in &rect.edges {
            ensure(e.scan.events.is_empty(), || format!("{label}: events on {} edge", e.name))?;
        }
    }
    Ok("all counts 0, no events on any edge".into())
}

fn criterion_4(suite: &Suite) -> Check {
    for (name, _, r) in &suite.runs {
        ensure(r.rectangle_residual == 0, || format!("{name}: residual {}", r.rectangle_residual))?;
    }
    Ok(format!("residual 0 on {} profiles", suite.runs.len()))
}

fn criterion_5() -> Check {
    let mut worst_w: f64 = 0.0;
    for n in 1..=3 {
        let s = RealMatrix::from_diagonal(&(1..=n).map(|k| k as f64).collect::<Vec<_>>());
        let w = winding_det2(&RotationPath::graph_loop(&s).unwrap(), 64).map_err(|e| e.to_string())?;
        worst_w = worst_w.max((w - n as f64).abs());
    }
    ensure(worst_w < 0.05, || format!("winding error {worst_w}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_d: f64 = 0.0;
    for n in 1..=5 {
        for _ in 0..100 {
            let s = random_symmetric(&mut rng, n, 3.0);
            let d = det2(&LagrangianFrame::graph(&s).unwrap()).map_err(|e| e.to_string())?.value();
            let zero = RealMatrix::zeros(n, n);
            let eye = RealMatrix::identity(n);
            let plus = CMatrix::from_parts(&eye, &s).unwrap();
            let minus = CMatrix::from_parts(&eye, &(&zero - &s)).unwrap();
            let expect: Complex<f64> = complex_det(&plus) / complex_det(&minus);
            worst_d = worst_d.max((d - expect).norm());
        }
    }
    ensure(worst_d < 1e-10, || format!("det2 error {worst_d:.2e}"))?;
    Ok(format!("winding error {worst_w:.1e}, det2 error {worst_d:.1e}"))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> RealMatrix {
    RealMatrix::from_fn(n, n, |_, _| rng.gen_range(-scale..scale)).symmetrized()
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    while accepted < 100 {
        let n = rng.gen_range(1..=4);
        let s0 = random_symmetric(&mut rng, n, 2.0);
        let t = rng.gen_range(-PI..PI);
        let (sn, cs) = t.sin_cos();
        let mus = sym_eig(&s0).unwrap().values;
        if mus.iter().any(|mu| (cs - sn * mu).abs() / (1.0 + mu * mu).sqrt() < 0.2) {
            continue;
        }
        accepted += 1;
        let frame = rotate(&LagrangianFrame::graph(&s0).unwrap(), &IndexSet::full(n), t);
        let chart = to_chart(&frame, &IndexSet::empty()).map_err(|e| e.to_string())?;
        let formula = chart_flow_formula(&s0, t).map_err(|e| e.to_string())?;
        // independent oracle: each eigenline of S₀ turns by t
        let eig = sym_eig(&s0).unwrap();
        let turned: Vec<f64> = eig.values.iter().map(|mu| (t + mu.atan()).tan()).collect();
        let closed = eig.vectors.matmul(&RealMatrix::from_diagonal(&turned)).matmul(&eig.vectors.transpose());
        worst = worst
            .max((&chart.s - &formula).norm_max())
            .max((&closed - &formula).norm_max() / (1.0 + closed.norm_max()));
    }
    ensure(worst < 1e-9, || format!("formula mismatch {worst:.2e}"))?;
    let mut worst_d: f64 = 0.0;
    let h = 1e-4;
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let s0 = random_symmetric(&mut rng, n, 1.0);
        let fd = (&chart_flow_formula(&s0, h).unwrap() - &chart_flow_formula(&s0, -h).unwrap()).scale(0.5 / h);
        let exact = &RealMatrix::identity(n) + &s0.matmul(&s0);
        worst_d = worst_d.max((&fd - &exact).norm_max());
    }
    ensure(worst_d < 1e-6, || format!("derivative mismatch {worst_d:.2e}"))?;
    Ok(format!("chart error {worst:.1e}, derivative error {worst_d:.1e}"))
}

fn criterion_7(suite: &Suite) -> Check {
    let mut max_slope = f64::NEG_INFINITY;
    let mut crossings = 0;
    for (name, _, r) in &suite.runs {
        for e in &r.conjugate_events {
            for &s in &e.slope_estimates {
                crossings += 1;
                max_slope = max_slope.max(s);
                ensure(s <= -0.9, || format!("{name}: slope {s} at t = {}", e.u_star))?;
            }
        }
        for c in &r.diagnostics.slope_checks {
            ensure(c.passed, || format!("{name}: {:?}", c.diagnostic))?;
        }
    }
    Ok(format!("{crossings} crossing directions, largest slope {max_slope:.4}"))
}

fn criterion_8(suite: &Suite) -> Check {
    let flow = FlowSettings::default();
    let mut worst_drift: f64 = 0.0;
    for (name, p, r) in &suite.runs {
        worst_drift = worst_drift.max(r.diagnostics.max_drift);
        for lambda in [0.0, r.diagnostics.lambda0] {
            let sol = fundamental_solution(p, lambda, p.a(), p.b(), &flow).map_err(|e| format!("{name}: {e}"))?;
            worst_drift = worst_drift.max(symplectic_residual(&sol));
        }
    }
    ensure(worst_drift < 1e-6, || format!("drift {worst_drift:.2e}"))?;

    let fine = MorseSettings {
        flow: flow.refined(),
        ..MorseSettings::default()
    };
    let mut worst_shift: f64 = 0.0;
    let mut compared = 0;
    for (name, p, r) in &suite.runs {
        let c = conjugate_points(p, &fine).map_err(|e| format!("{name}: {e}"))?;
        ensure(c.total == r.conjugate_total && c.events.len() == r.conjugate_events.len(), || {
            format!("{name}: conjugate count changed")
        })?;
        for (a, b) in c.events.iter().zip(&r.conjugate_events) {
            ensure(a.multiplicity == b.multiplicity, || format!("{name}: multiplicity changed"))?;
            worst_shift = worst_shift.max((a.u_star - b.u_star).abs());
        }
        let rf = morse_report(p, &fine).map_err(|e| format!("{name}: {e}"))?;
        ensure(
            rf.spectral_total == r.spectral_total && rf.rectangle_residual == r.rectangle_residual,
            || format!("{name}: spectral count changed"),
        )?;
        for (a, b) in rf.spectral_eigenvalues.iter().zip(&r.spectral_eigenvalues) {
            worst_shift = worst_shift.max((a - b).abs());
        }
        compared += 1;
    }
    ensure(worst_shift < 1e-8, || format!("crossing shift {worst_shift:.2e}"))?;
    Ok(format!(
        "drift {worst_drift:.1e}; halved step on {compared} profiles: shift {worst_shift:.1e}, counts unchanged"
    ))
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let k = IndexSet::new((0..n).filter(|_| rng.gen_bool(0.5)).collect());
        let c = ChartCoords::new(k.clone(), random_symmetric(&mut rng, n, 3.0)).unwrap();
        let back = to_chart(&from_chart(&c), &k).map_err(|e| e.to_string())?;
        worst = worst.max((&back.s - &c.s).norm_max());
    }
    ensure(worst < 1e-10, || format!("round trip error {worst:.2e}"))?;

    let mut samples = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let size = rng.gen_range(1..=n);
        let nullity = rng.gen_range(0..=size);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        let k = IndexSet::new(idx[..size].to_vec());
        // S₁ = Q diag(0, …, 0, d) Qᵀ with |d| ≥ 0.5
        let q = sym_eig(&random_symmetric(&mut rng, size, 1.0)).unwrap().vectors;
        let d: Vec<f64> = (0..size)
            .map(|i| {
                if i < nullity {
                    0.0
                } else {
                    rng.gen_range(0.5..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
                }
            })
            .collect();
        let s1 = q.matmul(&RealMatrix::from_diagonal(&d)).matmul(&q.transpose());
        let mut s = random_symmetric(&mut rng, n, 2.0);
        for (a, &i) in k.indices().iter().enumerate() {
            for (b, &j) in k.indices().iter().enumerate() {
                s[(i, j)] = s1[(a, b)];
            }
        }
        let frame = from_chart(&ChartCoords::new(k.clone(), s.symmetrized()).unwrap());
        let dim = intersection_dim(&frame, 1e-8).map_err(|e| e.to_string())?;
        ensure(dim == nullity, || format!("intersection_dim {dim}, engineered nullity {nullity}"))?;

        let chosen = select_chart(&frame).map_err(|e| e.to_string())?;
        let margin = chart_margin(&frame, &chosen).map_err(|e| e.to_string())?;
        ensure(chosen.len() == nullity && margin > 1e-6, || {
            format!("select_chart {:?} margin {margin:.1e}", chosen.one_based())
        })?;
        let c = to_chart(&frame, &chosen).map_err(|e| e.to_string())?;
        let kernel = sym_eig(&c.s1()).map(|sp| sp.values.iter().filter(|v| v.abs() < 1e-8).count()).unwrap_or(0);
        ensure(kernel == nullity, || format!("dim ker S₁ = {kernel} in selected chart, expected {nullity}"))?;
        samples += 1;
    }
    Ok(format!("round trip error {worst:.1e}; {samples} engineered kernels recovered"))
}

fn main() {
    let start = Instant::now();
    let mut failures = 0;
    let mut report = |id: usize, title: &str, outcome: Check| {
        match outcome {
            Ok(detail) => println!("criterion {id} PASS {title}: {detail}"),
            Err(why) => {
                failures += 1;
                println!("criterion {id} FAIL {title}: {why}");
            }
        }
    };
    report(1, "closed-form index chain", criterion_1());
    let suite = Suite::build();
    match &suite {
        Ok(s) => {
            report(2, "multiplicity handling", criterion_2(s));
            report(3, "no-conjugate cases", criterion_3());
            report(4, "rectangle identity", criterion_4(s));
        }
        Err(e) => {
            report(2, "multiplicity handling", Err(e.clone()));
            report(3, "no-conjugate cases", criterion_3());
            report(4, "rectangle identity", Err(e.clone()));
        }
    }
    report(5, "winding identities", criterion_5());
    report(6, "flow-formula consistency", criterion_6());
    match &suite {
        Ok(s) => {
            report(7, "crossing nondegeneracy", criterion_7(s));
            report(8, "numerical hygiene", criterion_8(s));
        }
        Err(e) => {
            report(7, "crossing nondegeneracy", Err(e.clone()));
            report(8, "numerical hygiene", Err(e.clone()));
        }
    }
    report(9, "chart and Grassmannian units", criterion_9());
    println!("acceptance: {} of 9 criteria passed in {:.1} s", 9 - failures, start.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
