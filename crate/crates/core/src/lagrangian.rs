//! Lagrangian subspaces of `R²ⁿ = Cⁿ`, the charts `φ_K`, and the `Det²` map.
//!
//! Coordinates are ordered `(q¹..qⁿ, p¹..pⁿ)` and identified with `q + ip`.
//! The reference Lagrangian is `σ = {0} x Rⁿ`; `σ_K = J_K σ`, where `J_K`
//! multiplies the coordinates in `K` by `i`. A subspace transversal to `σ_K`
//! is the column space of `J_K [I; S]` for a unique symmetric `S`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{complex_det, rank_kernel_abs, singular_pairs, solve_linear, sym_eig, CMatrix, DEFAULT_RANK_TOL};
use crate::RealMatrix;

/// Tolerance for the isotropy test `‖MᵀJM‖ ≤ tol · max(1, ‖M‖²)`.
pub const ISOTROPY_TOL: f64 = 1e-10;

/// Standard complex structure `J(q, p) = (-p, q)`.
pub fn complex_structure(n: usize) -> RealMatrix {
    let mut j = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// Sorted set of zero-based coordinate indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut idx: Vec<usize>) -> Self {
        idx.sort_unstable();
        idx.dedup();
        IndexSet(idx)
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// One-based labels, as used in reports.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&i) if i >= n => Err(Error::InvalidInput(format!("index {i} out of range for n = {n}"))),
            _ => Ok(()),
        }
    }
}

/// A `2n x n` matrix whose columns span a Lagrangian subspace.
///
/// Frames are not canonical: any basis of the subspace is a valid frame, and
/// two frames describe the same Lagrangian when their column spaces agree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LagrangianFrame {
    m: RealMatrix,
}

impl LagrangianFrame {
    /// Validates shape, rank and isotropy.
    pub fn new(m: RealMatrix) -> Result<Self> {
        if m.rows() != 2 * m.cols() || m.cols() == 0 {
            return Err(Error::InvalidInput(format!(
                "a Lagrangian frame is 2n x n, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !is_lagrangian(&m, ISOTROPY_TOL) {
            return Err(Error::InvalidInput("columns do not span a Lagrangian subspace".into()));
        }
        Ok(LagrangianFrame { m })
    }

    /// Wraps a matrix already known to be a Lagrangian frame.
    pub(crate) fn from_matrix_unchecked(m: RealMatrix) -> Self {
        debug_assert_eq!(m.rows(), 2 * m.cols());
        LagrangianFrame { m }
    }

    /// Frame `[I; S]` of the graph `{(q, Sq)}`.
    pub fn graph(s: &RealMatrix) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::InvalidInput("graph needs a square matrix".into()));
        }
        Self::new(RealMatrix::vstack(&RealMatrix::identity(s.rows()), s))
    }

    /// The horizontal Lagrangian `Rⁿ x {0}`.
    pub fn horizontal(n: usize) -> Self {
        LagrangianFrame {
            m: RealMatrix::vstack(&RealMatrix::identity(n), &RealMatrix::zeros(n, n)),
        }
    }

    pub fn n(&self) -> usize {
        self.m.cols()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.m
    }

    pub fn q_block(&self) -> RealMatrix {
        self.m.block(0, 0, self.n(), self.n())
    }

    pub fn p_block(&self) -> RealMatrix {
        self.m.block(self.n(), 0, self.n(), self.n())
    }

    /// `‖MᵀJM‖` (max-abs entry).
    pub fn isotropy_residual(&self) -> f64 {
        isotropy(&self.m)
    }

    /// Same subspace with orthonormal columns, by modified Gram–Schmidt with
    /// one re-orthogonalization pass. Orientation of the basis is preserved.
    pub fn orthonormalized(&self) -> Result<Self> {
        let mut m = self.m.clone();
        if !orthonormalize_columns(m.as_mut_slice(), 2 * self.n(), self.n()) {
            return Err(Error::InvalidInput("rank-deficient frame".into()));
        }
        Ok(LagrangianFrame { m })
    }

    /// Sine of the largest principal angle between the two subspaces.
    pub fn gap(&self, other: &LagrangianFrame) -> Result<f64> {
        let a = self.orthonormalized()?;
        let b = other.orthonormalized()?;
        let cross = a.m.tr_mul(&b.m);
        let (s, _) = singular_pairs(&cross);
        let smallest = s.last().copied().unwrap_or(1.0).min(1.0);
        Ok((1.0 - smallest * smallest).max(0.0).sqrt())
    }

    /// Equality as subspaces: `rank [M₁ M₂] = n` within `tol`.
    pub fn same_subspace(&self, other: &LagrangianFrame, tol: f64) -> Result<bool> {
        let a = self.orthonormalized()?;
        let b = other.orthonormalized()?;
        let joined = RealMatrix::hstack(&a.m, &b.m);
        Ok(rank_kernel_abs(&joined, tol).rank == self.n())
    }
}

pub(crate) fn isotropy(m: &RealMatrix) -> f64 {
    let n = m.cols();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            // ω(x, y) = ⟨Jx, y⟩ = Σ q_x p_y - p_x q_y
            let mut w = 0.0;
            for i in 0..n {
                w += m[(i, a)] * m[(n + i, b)] - m[(n + i, a)] * m[(i, b)];
            }
            worst = worst.max(w.abs());
        }
    }
    worst
}

/// Modified Gram–Schmidt on the columns of a row-major `rows x cols` buffer,
/// run twice. Returns `false` when a column collapses (rank deficiency).
pub(crate) fn orthonormalize_columns(data: &mut [f64], rows: usize, cols: usize) -> bool {
    for j in 0..cols {
        let original: f64 = (0..rows).map(|i| data[i * cols + j].powi(2)).sum::<f64>().sqrt();
        if original == 0.0 || !original.is_finite() {
            return false;
        }
        for _pass in 0..2 {
            for k in 0..j {
                let dot: f64 = (0..rows).map(|i| data[i * cols + k] * data[i * cols + j]).sum();
                for i in 0..rows {
                    data[i * cols + j] -= dot * data[i * cols + k];
                }
            }
        }
        let norm: f64 = (0..rows).map(|i| data[i * cols + j].powi(2)).sum::<f64>().sqrt();
        if norm <= 1e-13 * original {
            return false;
        }
        for i in 0..rows {
            data[i * cols + j] /= norm;
        }
    }
    true
}

/// `σ = {0} x Rⁿ`.
pub fn canonical_sigma(n: usize) -> LagrangianFrame {
    LagrangianFrame {
        m: RealMatrix::vstack(&RealMatrix::zeros(n, n), &RealMatrix::identity(n)),
    }
}

/// Rank `n` and `‖MᵀJM‖ ≤ tol · max(1, ‖M‖²)`.
pub fn is_lagrangian(m: &RealMatrix, tol: f64) -> bool {
    let n = m.cols();
    if m.rows() != 2 * n || n == 0 || !m.is_finite() {
        return false;
    }
    let scale = m.norm_max().powi(2).max(1.0);
    if isotropy(m) > tol * scale {
        return false;
    }
    match crate::numkernel::rank_kernel(m, DEFAULT_RANK_TOL) {
        Ok(r) => r.rank == n,
        Err(_) => false,
    }
}

/// `dim(λ ∩ σ)`, read as the nullity of the q-block of an orthonormal frame.
/// Singular values of that block are cosines of angles in `[0, 1]`, so `tol`
/// is an absolute threshold.
pub fn intersection_dim(frame: &LagrangianFrame, tol: f64) -> Result<usize> {
    let o = frame.orthonormalized()?;
    Ok(frame.n() - rank_kernel_abs(&o.q_block(), tol).rank)
}

/// Smallest singular value of the q-block of the orthonormalized frame: the
/// sine of the smallest angle between `λ` and `σ`.
pub fn sigma_distance(frame: &LagrangianFrame) -> Result<f64> {
    let o = frame.orthonormalized()?;
    Ok(singular_pairs(&o.q_block()).0.last().copied().unwrap_or(0.0))
}

/// Picks `K` with `|K| = dim(λ ∩ σ)` and `λ` transversal to `σ_K`.
pub fn select_chart(frame: &LagrangianFrame) -> Result<IndexSet> {
    let k = intersection_dim(frame, DEFAULT_RANK_TOL)?;
    select_chart_with(frame, k)
}

/// Chart selection treating the `k` directions of `λ` closest to `σ` as the
/// intersection. With `k = dim(λ ∩ σ)` this is the exact construction: a
/// basis `v₁..v_k` of `λ ∩ σ` is completed to a basis of `σ` by canonical
/// vectors `e_i`, `i ∉ K`; equivalently the rows `K` of `[v₁..v_k]` form an
/// invertible block, found here by greedy row pivoting (ties to the lowest
/// index).
pub fn select_chart_with(frame: &LagrangianFrame, k: usize) -> Result<IndexSet> {
    let n = frame.n();
    if k > n {
        return Err(Error::InvalidInput(format!("chart size {k} exceeds n = {n}")));
    }
    if k == 0 {
        return Ok(IndexSet::empty());
    }
    let o = frame.orthonormalized()?;
    let (_, right) = singular_pairs(&o.q_block());
    // right singular vectors for the k smallest singular values
    let coeff_cols: Vec<usize> = (n - k..n).collect();
    let all_rows: Vec<usize> = (0..n).collect();
    let coeffs = right.select(&all_rows, &coeff_cols);
    let v = o.p_block().matmul(&coeffs); // n x k, columns ≈ basis of λ ∩ σ

    // Column-pivoted Gram–Schmidt on the rows of v.
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| v.row(i).to_vec()).collect();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in rows.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            match best {
                Some((_, b)) if norm <= b * (1.0 + 1e-12) => {}
                _ => best = Some((i, norm)),
            }
        }
        let (pick, norm) = best.expect("at least one candidate row");
        chosen.push(pick);
        if norm == 0.0 {
            continue;
        }
        let unit: Vec<f64> = rows[pick].iter().map(|x| x / norm).collect();
        for (i, r) in rows.iter_mut().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let dot: f64 = r.iter().zip(&unit).map(|(a, b)| a * b).sum();
            for (x, u) in r.iter_mut().zip(&unit) {
                *x -= dot * u;
            }
        }
    }
    Ok(IndexSet::new(chosen))
}

/// Chart coordinates `(K, S)` with `λ = J_K λ_S`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartCoords {
    pub k: IndexSet,
    pub s: RealMatrix,
}

impl ChartCoords {
    pub fn new(k: IndexSet, s: RealMatrix) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::InvalidInput("chart matrix must be square".into()));
        }
        k.check(s.rows())?;
        if s.asymmetry() > ISOTROPY_TOL * s.norm_max().max(1.0) {
            return Err(Error::InvalidInput("chart matrix must be symmetric".into()));
        }
        Ok(ChartCoords { k, s })
    }

    /// The `K x K` block `S₁`.
    pub fn s1(&self) -> RealMatrix {
        self.s.select(self.k.indices(), self.k.indices())
    }
}

/// `J_K⁻¹ M`: `(q^i, p^i) ↦ (p^i, -q^i)` for `i ∈ K`.
fn apply_jk_inverse(m: &RealMatrix, k: &IndexSet) -> RealMatrix {
    let n = m.cols();
    let mut out = m.clone();
    for &i in k.indices() {
        for c in 0..n {
            out[(i, c)] = m[(n + i, c)];
            out[(n + i, c)] = -m[(i, c)];
        }
    }
    out
}

/// Smallest singular value of the top block of `J_K⁻¹ λ` for an orthonormal
/// frame: how far `λ` is from meeting `σ_K`. Zero means outside the chart.
pub fn chart_margin(frame: &LagrangianFrame, k: &IndexSet) -> Result<f64> {
    let o = frame.orthonormalized()?;
    let moved = apply_jk_inverse(o.matrix(), k);
    let n = frame.n();
    Ok(singular_pairs(&moved.block(0, 0, n, n)).0.last().copied().unwrap_or(0.0))
}

/// `φ_K⁻¹ λ` together with the asymmetry removed by symmetrization.
pub fn to_chart_with_asymmetry(frame: &LagrangianFrame, k: &IndexSet) -> Result<(ChartCoords, f64)> {
    let n = frame.n();
    k.check(n)?;
    let moved = apply_jk_inverse(frame.matrix(), k);
    let top = moved.block(0, 0, n, n);
    let bottom = moved.block(n, 0, n, n);
    // S = bottom · top⁻¹  ⇔  topᵀ Sᵀ = bottomᵀ
    let st = solve_linear(&top.transpose(), &bottom.transpose()).map_err(|_| {
        Error::ChartDomain(format!("subspace meets σ_K for K = {:?}", k.one_based()))
    })?;
    let s = st.transpose();
    let asym = s.asymmetry();
    Ok((
        ChartCoords {
            k: k.clone(),
            s: s.symmetrized(),
        },
        asym,
    ))
}

pub fn to_chart(frame: &LagrangianFrame, k: &IndexSet) -> Result<ChartCoords> {
    to_chart_with_asymmetry(frame, k).map(|(c, _)| c)
}

/// Frame `J_K [I; S]`.
pub fn from_chart(c: &ChartCoords) -> LagrangianFrame {
    let n = c.s.rows();
    let mut m = RealMatrix::vstack(&RealMatrix::identity(n), &c.s);
    for &i in c.k.indices() {
        for col in 0..n {
            let q = m[(i, col)];
            let p = m[(n + i, col)];
            m[(i, col)] = -p;
            m[(n + i, col)] = q;
        }
    }
    LagrangianFrame { m }
}

/// A complex number of modulus one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitComplex(Complex<f64>);

impl UnitComplex {
    pub fn new(z: Complex<f64>) -> Result<Self> {
        if (z.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("|{z}| != 1")));
        }
        Ok(UnitComplex(z))
    }

    pub fn value(self) -> Complex<f64> {
        self.0
    }

    pub fn arg(self) -> f64 {
        self.0.arg()
    }

    /// Angle of `self / previous` in `(-π, π]`.
    pub fn phase_from(self, previous: UnitComplex) -> f64 {
        (self.0 * previous.0.conj()).arg()
    }
}

/// `Det²(λ) = det(U)²`, where the columns of an orthonormal frame read as
/// `q + ip` form the unitary `U`. Basis-independent since two orthonormal
/// frames differ by a real orthogonal factor.
pub fn det2(frame: &LagrangianFrame) -> Result<UnitComplex> {
    let o = frame.orthonormalized()?;
    let u = CMatrix::from_parts(&o.q_block(), &o.p_block())?;
    let d = complex_det(&u);
    let d2 = d * d;
    // renormalize away roundoff in |det U|
    Ok(UnitComplex(d2 / d2.norm()))
}

/// Multiplies the `K` coordinates by `e^{it}`; `K = {1..n}` is the full
/// flow `λ ↦ e^{it} λ`.
pub fn rotate(frame: &LagrangianFrame, k: &IndexSet, t: f64) -> LagrangianFrame {
    let n = frame.n();
    let (s, c) = t.sin_cos();
    let mut m = frame.m.clone();
    for &i in k.indices() {
        for col in 0..n {
            let q = frame.m[(i, col)];
            let p = frame.m[(n + i, col)];
            m[(i, col)] = c * q - s * p;
            m[(n + i, col)] = s * q + c * p;
        }
    }
    LagrangianFrame { m }
}

/// Graph-chart coordinates of `e^{it} λ_{S₀}`:
/// `(sin t·I + cos t·S₀)(cos t·I - sin t·S₀)⁻¹`.
pub fn chart_flow_formula(s0: &RealMatrix, t: f64) -> Result<RealMatrix> {
    let n = s0.rows();
    let (s, c) = t.sin_cos();
    let eye = RealMatrix::identity(n);
    let num = &eye.scale(s) + &s0.scale(c);
    let den = &eye.scale(c) - &s0.scale(s);
    // eigenvalues of the denominator are cos(t + atan μ)·√(1 + μ²)
    let spec = sym_eig(&s0.symmetrized())?;
    if spec.values.iter().any(|&mu| (c - s * mu).abs() <= 1e-12 * (1.0 + mu * mu).sqrt()) {
        return Err(Error::ChartDomain(format!("cos t·I - sin t·S₀ singular at t = {t}")));
    }
    // numerator and denominator commute, so N D⁻¹ = D⁻¹ N
    let out = solve_linear(&den, &num)
        .map_err(|_| Error::ChartDomain(format!("cos t·I - sin t·S₀ singular at t = {t}")))?;
    Ok(out.symmetrized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn m(rows: &[&[f64]]) -> RealMatrix {
        RealMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn line(theta: f64) -> LagrangianFrame {
        LagrangianFrame::new(m(&[&[theta.cos()], &[theta.sin()]])).unwrap()
    }

    fn diag_frame() -> LagrangianFrame {
        // q-block diag(1, 0), p-block diag(0, 1)
        LagrangianFrame::new(m(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]])).unwrap()
    }

    #[test]
    fn canonical_sigma_layout() {
        assert_eq!(canonical_sigma(1).matrix().as_slice(), &[0.0, 1.0]);
        let s2 = canonical_sigma(2);
        assert_eq!(s2.matrix().column(0), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(s2.matrix().column(1), vec![0.0, 0.0, 0.0, 1.0]);
        for n in 1..5 {
            assert_eq!(intersection_dim(&canonical_sigma(n), DEFAULT_RANK_TOL).unwrap(), n);
        }
    }

    #[test]
    fn lagrangian_test_cases() {
        assert!(is_lagrangian(canonical_sigma(2).matrix(), ISOTROPY_TOL));
        let sym = RealMatrix::vstack(&RealMatrix::identity(2), &m(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert!(is_lagrangian(&sym, ISOTROPY_TOL));
        let anti = RealMatrix::vstack(&RealMatrix::identity(2), &m(&[&[0.0, 1.0], &[-1.0, 0.0]]));
        assert!(!is_lagrangian(&anti, ISOTROPY_TOL));
        assert!(LagrangianFrame::new(anti).is_err());
    }

    #[test]
    fn intersection_dimensions() {
        let g = LagrangianFrame::graph(&m(&[&[2.0, 1.0], &[1.0, -3.0]])).unwrap();
        assert_eq!(intersection_dim(&g, DEFAULT_RANK_TOL).unwrap(), 0);
        assert_eq!(intersection_dim(&diag_frame(), DEFAULT_RANK_TOL).unwrap(), 1);
    }

    #[test]
    fn chart_selection_examples() {
        assert_eq!(select_chart(&canonical_sigma(3)).unwrap(), IndexSet::full(3));
        let g = LagrangianFrame::graph(&RealMatrix::identity(2)).unwrap();
        assert_eq!(select_chart(&g).unwrap(), IndexSet::empty());
        assert_eq!(select_chart(&diag_frame()).unwrap(), IndexSet::new(vec![1]));
    }

    #[test]
    fn singleton_chart_oracle() {
        // Enumerate both singleton charts and keep those transversal to λ.
        let f = diag_frame();
        let transversal: Vec<usize> = (0..2)
            .filter(|&i| chart_margin(&f, &IndexSet::new(vec![i])).unwrap() > 1e-8)
            .collect();
        assert_eq!(transversal, vec![1]);
    }

    #[test]
    fn to_chart_examples() {
        let s = m(&[&[1.0, 2.0], &[2.0, -1.0]]);
        let c = to_chart(&LagrangianFrame::graph(&s).unwrap(), &IndexSet::empty()).unwrap();
        assert!((&c.s - &s).norm_max() < 1e-14);

        let c = to_chart(&canonical_sigma(3), &IndexSet::full(3)).unwrap();
        assert!(c.s.norm_max() < 1e-15);

        let c = to_chart(&line(FRAC_PI_4), &IndexSet::empty()).unwrap();
        assert!((c.s[(0, 0)] - 1.0).abs() < 1e-14);

        assert!(matches!(
            to_chart(&canonical_sigma(2), &IndexSet::empty()),
            Err(Error::ChartDomain(_))
        ));
    }

    #[test]
    fn from_chart_examples() {
        let z = RealMatrix::zeros(2, 2);
        let h = from_chart(&ChartCoords::new(IndexSet::empty(), z.clone()).unwrap());
        assert_eq!(h.matrix(), LagrangianFrame::horizontal(2).matrix());

        let f = from_chart(&ChartCoords::new(IndexSet::full(2), z.clone()).unwrap());
        assert!(f.same_subspace(&canonical_sigma(2), 1e-12).unwrap());

        let f = from_chart(&ChartCoords::new(IndexSet::new(vec![0]), z).unwrap());
        assert_eq!(f.matrix().column(0), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(f.matrix().column(1), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn det2_examples() {
        let one = det2(&LagrangianFrame::horizontal(3)).unwrap().value();
        assert!((one - Complex::new(1.0, 0.0)).norm() < 1e-15);
        for theta in [0.3, 1.1, FRAC_PI_2, 2.5] {
            let got = det2(&line(theta)).unwrap().value();
            let want = Complex::from_polar(1.0, 2.0 * theta);
            assert!((got - want).norm() < 1e-14);
        }
        let d = det2(&LagrangianFrame::graph(&RealMatrix::identity(2)).unwrap()).unwrap().value();
        assert!((d + 1.0).norm() < 1e-14);
    }

    #[test]
    fn rotation_examples() {
        let g = LagrangianFrame::graph(&m(&[&[0.5, 0.2], &[0.2, -1.0]])).unwrap();
        assert!(rotate(&g, &IndexSet::full(2), 0.0).same_subspace(&g, 1e-12).unwrap());
        let r = rotate(&LagrangianFrame::horizontal(3), &IndexSet::full(3), FRAC_PI_2);
        assert!(r.same_subspace(&canonical_sigma(3), 1e-12).unwrap());
        let t = 0.37;
        let before = det2(&g).unwrap().value();
        let after = det2(&rotate(&g, &IndexSet::full(2), t)).unwrap().value();
        assert!((after - before * Complex::from_polar(1.0, 4.0 * t)).norm() < 1e-13);
        // half turn returns every Lagrangian to itself
        assert!(rotate(&g, &IndexSet::full(2), PI).same_subspace(&g, 1e-12).unwrap());
    }

    #[test]
    fn flow_formula_examples() {
        let z = RealMatrix::zeros(2, 2);
        let s = chart_flow_formula(&z, FRAC_PI_4).unwrap();
        assert!((&s - &RealMatrix::identity(2)).norm_max() < 1e-15);
        let s0 = m(&[&[0.3, -0.2], &[-0.2, 0.9]]);
        assert!((&chart_flow_formula(&s0, 0.0).unwrap() - &s0).norm_max() < 1e-15);
        // derivative at zero is I + S₀²
        let h = 1e-6;
        let d = (&chart_flow_formula(&s0, h).unwrap() - &chart_flow_formula(&s0, -h).unwrap()).scale(0.5 / h);
        let want = &RealMatrix::identity(2) + &s0.matmul(&s0);
        assert!((&d - &want).norm_max() < 1e-8);
        // denominator singular: S₀ = I at t = π/4
        assert!(matches!(
            chart_flow_formula(&RealMatrix::identity(2), FRAC_PI_4),
            Err(Error::ChartDomain(_))
        ));
    }
}
