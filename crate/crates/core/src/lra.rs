//! Sketched low-rank approximation.
//!
//! The pipeline compresses `A` with four sketches — `S` (rows), `R`
//! (columns) and two enlargement sketches `V`, `W` that shrink the core
//! problem — solves a small constrained rank-`k` problem, and expands the
//! answer back to factored `n×k · k×d` form. The subspace-restricted
//! costs (`best_rank_k_in_rowspace` / `colspace`) double as the surrogate
//! losses the learning stage optimizes.

use crate::matlin::{self, DenseMatrix};
use crate::sketch::{AnySketch, CountSketch};
use crate::{cast, Error, Result, Scalar, RANK_REL_TOL};

/// Rank-k output in factored form: `left` is `n×k`, `right` is `k×d`.
#[derive(Debug, Clone)]
pub struct LowRankFactors<F> {
    pub left: DenseMatrix<F>,
    pub right: DenseMatrix<F>,
}

impl<F: Scalar> LowRankFactors<F> {
    pub fn zero(n: usize, k: usize, d: usize) -> Self {
        LowRankFactors {
            left: DenseMatrix::zeros(n, k),
            right: DenseMatrix::zeros(k, d),
        }
    }

    pub fn rank_bound(&self) -> usize {
        self.left.cols()
    }

    /// Materialize `left · right` (test/diagnostic use; the cost routines
    /// below avoid this).
    pub fn reconstruct(&self) -> DenseMatrix<F> {
        self.left.matmul(&self.right)
    }
}

/// The four sketches driving `sketch_lowrank` on an `n×d` input.
///
/// `V` and `W` re-compress the already-sketched factors, so they must be
/// at least as large as the spaces they embed: `m_V ≥ m_R`, `m_W ≥ m_S`.
#[derive(Debug, Clone)]
pub struct LraSketchSet<F> {
    pub s: AnySketch<F>,
    pub r: AnySketch<F>,
    pub v: AnySketch<F>,
    pub w: AnySketch<F>,
}

impl<F: Scalar> LraSketchSet<F> {
    pub fn new(s: AnySketch<F>, r: AnySketch<F>, v: AnySketch<F>, w: AnySketch<F>) -> Result<Self> {
        if v.rows() < r.rows() || w.rows() < s.rows() {
            return Err(Error::InvalidInput(format!(
                "enlargement sketches too small: m_V {} < m_R {} or m_W {} < m_S {}",
                v.rows(),
                r.rows(),
                w.rows(),
                s.rows()
            )));
        }
        Ok(LraSketchSet { s, r, v, w })
    }

    /// Classical baseline at desk-scale default sizes:
    /// `m_S = m_R = max(4k², k+10)`, `m_V = m_W = 2·max(m_S, m_R)`.
    pub fn classical(n: usize, d: usize, k: usize, seed: u64) -> Result<Self> {
        let m_sr = (4 * k * k).max(k + 10);
        Self::classical_sized(n, d, m_sr, m_sr, 2 * m_sr, 2 * m_sr, seed)
    }

    pub fn classical_sized(
        n: usize,
        d: usize,
        m_s: usize,
        m_r: usize,
        m_v: usize,
        m_w: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::new(
            CountSketch::random(m_s, n, seed)?.into(),
            CountSketch::random(m_r, d, seed.wrapping_add(1))?.into(),
            CountSketch::random(m_v, n, seed.wrapping_add(2))?.into(),
            CountSketch::random(m_w, d, seed.wrapping_add(3))?.into(),
        )
    }

    /// Learned `S`, `R` paired with fresh classical `V`, `W` at twice the
    /// larger learned size.
    pub fn with_learned(
        s: AnySketch<F>,
        r: AnySketch<F>,
        n: usize,
        d: usize,
        seed: u64,
    ) -> Result<Self> {
        let m_vw = 2 * s.rows().max(r.rows());
        Self::new(
            s,
            r,
            CountSketch::random(m_vw, n, seed)?.into(),
            CountSketch::random(m_vw, d, seed.wrapping_add(1))?.into(),
        )
    }

    fn check_shapes(&self, a: &DenseMatrix<F>) -> Result<()> {
        if self.s.input_dim() != a.rows()
            || self.v.input_dim() != a.rows()
            || self.r.input_dim() != a.cols()
            || self.w.input_dim() != a.cols()
        {
            return Err(Error::InvalidInput(format!(
                "sketch set does not conform to a {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        Ok(())
    }
}

// ── Subspace-restricted rank-k approximation ────────────────────────

/// Best rank-`k` approximation of `A` with rows restricted to the row
/// space of `B`; returns the factors and the squared Frobenius cost.
///
/// With `V` an orthonormal basis of `row(B)` the minimizer is
/// `[AV]_k Vᵀ`, and the cost is `‖A‖_F² − Σ_{i≤k} σ_i(AV)²`.
pub fn best_rank_k_in_rowspace<F: Scalar>(
    a: &DenseMatrix<F>,
    b: &DenseMatrix<F>,
    k: usize,
) -> Result<(LowRankFactors<F>, F)> {
    if b.rows() == 0 || b.cols() == 0 {
        return Err(Error::InvalidInput("empty rowspace source".into()));
    }
    if b.cols() != a.cols() {
        return Err(Error::InvalidInput(format!(
            "rowspace source has {} columns, expected {}",
            b.cols(),
            a.cols()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("rank 0 requested".into()));
    }
    let (n, d) = (a.rows(), a.cols());
    let basis = matlin::rowspace_basis(b); // d × r
    let r = basis.cols();
    if r == 0 {
        return Ok((LowRankFactors::zero(n, k, d), a.frob_sq()));
    }
    let av = a.matmul(&basis); // n × r
    let s = matlin::svd(&av, None)?;
    let kk = k.min(s.sigma.len());

    // left = U_k Σ_k (padded to k columns), right = (basis · W_k)ᵀ.
    let mut left = DenseMatrix::zeros(n, k);
    for j in 0..kk {
        for i in 0..n {
            left[(i, j)] = s.u[(i, j)] * s.sigma[j];
        }
    }
    let mut right = DenseMatrix::zeros(k, d);
    for j in 0..kk {
        for i in 0..d {
            let mut acc = F::zero();
            for t in 0..r {
                acc += basis[(i, t)] * s.v[(t, j)];
            }
            right[(j, i)] = acc;
        }
    }
    let captured: F = s.sigma.iter().take(kk).map(|&x| x * x).sum();
    let cost = (a.frob_sq() - captured).max(F::zero());
    Ok((LowRankFactors { left, right }, cost))
}

/// Column-space counterpart: minimizes over rank-`k` `X` with columns in
/// `col(C)`; computed as the transpose of the rowspace problem.
pub fn best_rank_k_in_colspace<F: Scalar>(
    a: &DenseMatrix<F>,
    c: &DenseMatrix<F>,
    k: usize,
) -> Result<(LowRankFactors<F>, F)> {
    if c.rows() != a.rows() {
        return Err(Error::InvalidInput(format!(
            "colspace source has {} rows, expected {}",
            c.rows(),
            a.rows()
        )));
    }
    let (f, cost) = best_rank_k_in_rowspace(&a.transpose(), &c.transpose(), k)?;
    Ok((
        LowRankFactors {
            left: f.right.transpose(),
            right: f.left.transpose(),
        },
        cost,
    ))
}

// ── Small constrained solver ────────────────────────────────────────

/// Solution of `min_{rank-k Z} ‖C Z D − G‖_F²` in factored form.
#[derive(Debug, Clone)]
pub struct SmallSolve<F> {
    /// Left factor of `Z` (`C.cols × k`).
    pub z_left: DenseMatrix<F>,
    /// Right factor of `Z` (`k × D.rows`).
    pub z_right: DenseMatrix<F>,
    /// `‖C Z D − G‖_F²` at the returned `Z`.
    pub residual: F,
    /// A triangular factor was numerically singular and the
    /// pseudo-inverse fallback was used.
    pub degenerate: bool,
}

/// Minimize `‖C Z D − G‖_F²` over rank-`k` `Z`: QR of `C` and of `Dᵀ`,
/// truncated SVD of the projected core `Q_Cᵀ G Q_D`, and back-substitution
/// through the triangular factors.
pub fn solve_small_rank_k<F: Scalar>(
    c: &DenseMatrix<F>,
    d: &DenseMatrix<F>,
    g: &DenseMatrix<F>,
    k: usize,
) -> Result<SmallSolve<F>> {
    if c.rows() != g.rows() || d.cols() != g.cols() {
        return Err(Error::InvalidInput(format!(
            "solver shapes: C {}x{}, D {}x{}, G {}x{}",
            c.rows(),
            c.cols(),
            d.rows(),
            d.cols(),
            g.rows(),
            g.cols()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("rank 0 requested".into()));
    }
    let (qc, tc) = matlin::qr(c)?;
    let (qd, td) = matlin::qr(&d.transpose())?;
    let core = qc.transpose().matmul(g).matmul(&qd);
    let cs = matlin::svd(&core, None)?;
    let kk = k.min(cs.sigma.len());

    // Split [core]_k into M_L · M_R with singular values folded left.
    let mut m_l = DenseMatrix::zeros(core.rows(), kk.max(1));
    let mut m_r = DenseMatrix::zeros(kk.max(1), core.cols());
    for j in 0..kk {
        for i in 0..core.rows() {
            m_l[(i, j)] = cs.u[(i, j)] * cs.sigma[j];
        }
        for i in 0..core.cols() {
            m_r[(j, i)] = cs.v[(i, j)];
        }
    }

    let mut degenerate = false;
    // Z_L = T_C⁻¹ M_L and Z_R = M_R (T_Dᵀ)⁻¹, i.e. T_D Z_Rᵀ = M_Rᵀ.
    let zl_small = solve_upper_triangular(&tc, &m_l, &mut degenerate)?;
    let zr_small = solve_upper_triangular(&td, &m_r.transpose(), &mut degenerate)?.transpose();

    let mut z_left = DenseMatrix::zeros(c.cols(), k);
    for i in 0..zl_small.rows() {
        for j in 0..kk {
            z_left[(i, j)] = zl_small[(i, j)];
        }
    }
    let mut z_right = DenseMatrix::zeros(k, d.rows());
    for i in 0..kk {
        for j in 0..zr_small.cols() {
            z_right[(i, j)] = zr_small[(i, j)];
        }
    }

    let approx = c.matmul(&z_left).matmul(&z_right.matmul(d));
    let residual = approx.sub(g).frob_sq();
    Ok(SmallSolve {
        z_left,
        z_right,
        residual,
        degenerate,
    })
}

/// Solve `T X = B` for upper-triangular `T` by back-substitution; falls
/// back to the pseudo-inverse when `T` is non-square or numerically
/// singular, flagging `degenerate`.
fn solve_upper_triangular<F: Scalar>(
    t: &DenseMatrix<F>,
    b: &DenseMatrix<F>,
    degenerate: &mut bool,
) -> Result<DenseMatrix<F>> {
    let r = t.rows();
    let square = r == t.cols();
    let mut dmax = F::zero();
    let mut dmin = F::infinity();
    for i in 0..r.min(t.cols()) {
        let x = t[(i, i)].abs();
        dmax = dmax.max(x);
        dmin = dmin.min(x);
    }
    let well_conditioned = square && dmax > F::zero() && dmin > dmax * cast::<F>(RANK_REL_TOL);
    if !well_conditioned {
        *degenerate = true;
        return Ok(matlin::pseudo_inverse(t)?.matmul(b));
    }
    let mut x = DenseMatrix::zeros(r, b.cols());
    for j in 0..b.cols() {
        for i in (0..r).rev() {
            let mut acc = b[(i, j)];
            for kk in (i + 1)..r {
                acc -= t[(i, kk)] * x[(kk, j)];
            }
            x[(i, j)] = acc / t[(i, i)];
        }
    }
    Ok(x)
}

// ── Four-sketch pipeline ────────────────────────────────────────────

/// The sketch-and-solve low-rank pipeline: compress `A` to
/// `C = V·A·Rᵀ`, `D = S·A·Wᵀ`, `G = V·A·Wᵀ`, solve
/// `min_{rank-k Z} ‖C Z D − G‖_F²`, and return `P = A·Rᵀ·Z_L`,
/// `Q = Z_R·S·A`. All sketch products use the sparse kernels.
pub fn sketch_lowrank<F: Scalar>(
    a: &DenseMatrix<F>,
    set: &LraSketchSet<F>,
    k: usize,
) -> Result<LowRankFactors<F>> {
    set.check_shapes(a)?;
    if k == 0 || k > set.s.rows().min(set.r.rows()) {
        return Err(Error::InvalidInput(format!(
            "rank {k} out of range for sketch sizes {}x{}",
            set.s.rows(),
            set.r.rows()
        )));
    }
    let art = set.r.apply_right(a)?; // n × m_R
    let sa = set.s.apply_left(a)?; // m_S × d
    let c = set.v.apply_left(&art)?; // m_V × m_R
    let dd = set.w.apply_right(&sa)?; // m_S × m_W
    let g = set.w.apply_right(&set.v.apply_left(a)?)?; // m_V × m_W

    let solve = solve_small_rank_k(&c, &dd, &g, k)?;
    Ok(LowRankFactors {
        left: art.matmul(&solve.z_left),
        right: solve.z_right.matmul(&sa),
    })
}

// ── Costs ───────────────────────────────────────────────────────────

/// Exact `‖A − PQ‖_F²`, accumulated row by row (with compensated
/// summation) without materializing `PQ`.
pub fn lra_cost<F: Scalar>(a: &DenseMatrix<F>, f: &LowRankFactors<F>) -> F {
    assert_eq!(f.left.rows(), a.rows(), "factor rows mismatch");
    assert_eq!(f.right.cols(), a.cols(), "factor cols mismatch");
    let k = f.left.cols();
    let d = a.cols();
    let mut total = F::zero();
    let mut comp = F::zero();
    let mut row_buf = vec![F::zero(); d];
    for i in 0..a.rows() {
        row_buf.copy_from_slice(a.row(i));
        for t in 0..k {
            let c = f.left[(i, t)];
            if c == F::zero() {
                continue;
            }
            let qrow = f.right.row(t);
            for (x, &q) in row_buf.iter_mut().zip(qrow) {
                *x -= c * q;
            }
        }
        let row_sq: F = row_buf.iter().map(|&x| x * x).sum();
        let y = row_sq - comp;
        let t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    total
}

/// Sketched cost estimate `‖S'(PQ − A)R'ᵀ‖_F²`, evaluated as
/// `‖(S'P)(Q R'ᵀ) − S'A R'ᵀ‖_F²` so `PQ` is never formed.
pub fn sketched_lra_cost<F: Scalar>(
    a: &DenseMatrix<F>,
    f: &LowRankFactors<F>,
    s_est: &CountSketch<F>,
    r_est: &CountSketch<F>,
) -> Result<F> {
    if s_est.n() != a.rows() || r_est.n() != a.cols() {
        return Err(Error::InvalidInput(format!(
            "estimator sketches over {}/{} inputs do not conform to a {}x{} matrix",
            s_est.n(),
            r_est.n(),
            a.rows(),
            a.cols()
        )));
    }
    let s_any: AnySketch<F> = AnySketch::Count(s_est.clone());
    let r_any: AnySketch<F> = AnySketch::Count(r_est.clone());
    let sp = s_any.apply_left(&f.left)?; // m' × k
    let qr = r_any.apply_right(&f.right)?; // k × m'
    let sar = r_any.apply_right(&s_any.apply_left(a)?)?; // m' × m'
    Ok(sp.matmul(&qr).sub(&sar).frob_sq())
}

/// Which candidate an ApproxCheck kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chosen {
    Learned,
    Classical,
}

impl std::fmt::Display for Chosen {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Chosen::Learned => write!(f, "learned"),
            Chosen::Classical => write!(f, "classical"),
        }
    }
}

/// Run the pipeline with both sketch sets, estimate both costs with one
/// fresh pair of classical CountSketches of `m_est` rows, and keep the
/// candidate with the smaller estimate. Exact ties go to the learned
/// candidate.
pub fn approx_check_lra<F: Scalar>(
    a: &DenseMatrix<F>,
    learned: &LraSketchSet<F>,
    classical: &LraSketchSet<F>,
    k: usize,
    m_est: usize,
    seed: u64,
) -> Result<(LowRankFactors<F>, Chosen)> {
    let f_l = sketch_lowrank(a, learned, k)?;
    let f_c = sketch_lowrank(a, classical, k)?;
    let s_est = CountSketch::random(m_est, a.rows(), seed)?;
    let r_est = CountSketch::random(m_est, a.cols(), seed.wrapping_add(0x9e37_79b9))?;
    let delta_l = sketched_lra_cost(a, &f_l, &s_est, &r_est)?;
    let delta_c = sketched_lra_cost(a, &f_c, &s_est, &r_est)?;
    if delta_l <= delta_c {
        Ok((f_l, Chosen::Learned))
    } else {
        Ok((f_c, Chosen::Classical))
    }
}
