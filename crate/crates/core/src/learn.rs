//! Learning the sketch: greedy placement of the nonzero positions, then
//! gradient descent on the nonzero values, against the subspace proxy
//! loss `‖[AV]_k Vᵀ − A‖_F²` (V spanning `row(SA)`).
//!
//! The proxy depends on a member `A` only through its Gram matrix
//! `K = AAᵀ`, so candidate evaluation works on small thin-factor state
//! (see [`ProxyEvaluator`](self) internals) instead of touching the data
//! dimension; the identity with the dense route is unit-tested.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::lra::{best_rank_k_in_colspace, best_rank_k_in_rowspace};
use crate::matlin::{self, DenseMatrix};
use crate::sketch::{AnySketch, CountSketch};
use crate::{cast, Error, Result, Scalar, RANK_REL_TOL};

/// Training matrices; all members share one shape.
#[derive(Debug, Clone)]
pub struct TrainSet<F> {
    matrices: Vec<DenseMatrix<F>>,
}

impl<F: Scalar> TrainSet<F> {
    pub fn new(matrices: Vec<DenseMatrix<F>>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::InvalidInput("empty training set".into()));
        };
        let shape = (first.rows(), first.cols());
        if matrices.iter().any(|m| (m.rows(), m.cols()) != shape) {
            return Err(Error::InvalidInput("training matrices differ in shape".into()));
        }
        Ok(TrainSet { matrices })
    }

    pub fn members(&self) -> &[DenseMatrix<F>] {
        &self.matrices
    }

    pub fn rows(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.matrices[0].cols()
    }
}

/// Which side of the pipeline a sketch is being trained for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxyKind {
    /// Row sketch `S`: restrict to `row(SA)`.
    Rowspace,
    /// Column sketch `R`: restrict to `col(ARᵀ)`.
    Colspace,
}

/// Column visit order for the greedy placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingRule {
    /// Natural order `0..n`.
    ColumnOrder,
    /// Non-increasing maximum row norm across the training set (the
    /// ordering the separation results analyze); ties by index.
    NonincreasingNorm,
    /// Seeded shuffle.
    Random(u64),
}

/// Candidate signs for the greedy's `±1` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignSet {
    PlusOnly,
    MinusOnly,
    Both,
}

impl SignSet {
    fn candidates(self) -> &'static [i8] {
        match self {
            SignSet::PlusOnly => &[1],
            SignSet::MinusOnly => &[-1],
            SignSet::Both => &[1, -1],
        }
    }
}

#[derive(Debug, Clone)]
pub struct GreedyConfig {
    /// Bin count of the learned sketch.
    pub m: usize,
    /// Target rank of the proxy.
    pub k: usize,
    pub ordering: OrderingRule,
    pub signs: SignSet,
    pub proxy: ProxyKind,
}

impl GreedyConfig {
    pub fn new(m: usize, k: usize) -> Self {
        GreedyConfig {
            m,
            k,
            ordering: OrderingRule::NonincreasingNorm,
            signs: SignSet::Both,
            proxy: ProxyKind::Rowspace,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 {
            return Err(Error::InvalidInput("greedy needs m ≥ 1 and k ≥ 1".into()));
        }
        Ok(())
    }
}

// ── Proxy loss ──────────────────────────────────────────────────────

/// Surrogate loss of sketch `s` on one matrix: the subspace-restricted
/// rank-`k` cost on the relevant side.
pub fn proxy_loss<F: Scalar>(
    s: &AnySketch<F>,
    a: &DenseMatrix<F>,
    k: usize,
    proxy: ProxyKind,
) -> Result<F> {
    match proxy {
        ProxyKind::Rowspace => {
            let sa = s.apply_left(a)?;
            Ok(best_rank_k_in_rowspace(a, &sa, k)?.1)
        }
        ProxyKind::Colspace => {
            let art = s.apply_right(a)?;
            Ok(best_rank_k_in_colspace(a, &art, k)?.1)
        }
    }
}

/// Mean surrogate loss over a training set (factored Gram fast path).
pub fn mean_proxy_loss<F: Scalar>(
    tr: &TrainSet<F>,
    s: &CountSketch<F>,
    k: usize,
    proxy: ProxyKind,
) -> Result<F> {
    let evaluator = ProxyEvaluator::new(tr, k, proxy, s.bins());
    if s.n() != evaluator.n {
        return Err(Error::InvalidInput(format!(
            "sketch over {} inputs does not match proxy dimension {}",
            s.n(),
            evaluator.n
        )));
    }
    Ok(evaluator.loss_of(s.positions(), s.values()) / F::from(tr.members().len()).unwrap())
}

/// Proxy evaluation through thin Gram factors.
///
/// Each member enters as `K = M·Mᵀ` for a thin `M` (`n × r` with small
/// `r`): the eigendecomposition of `A·Aᵀ` on the row side, `Aᵀ` itself on
/// the column side. With `Y = S·M` and `G = Y·Yᵀ = UΛUᵀ` (an `m×m`
/// problem), the right singular directions are `V = YᵀU_rΛ_r^{-1/2}` and
/// the captured spectrum is the top-k eigenvalues of `Vᵀ (MᵀM) V`. A
/// single-column probe touches two rows of `Y`, so it costs `O(m·r)`
/// plus two small eigensolves — the data dimension never appears after
/// construction.
struct ProxyEvaluator<F> {
    members: Vec<MemberState<F>>,
    n: usize,
    m: usize,
    k: usize,
    base_p: Vec<usize>,
    base_v: Vec<F>,
}

struct MemberState<F> {
    /// Thin factor, `n × r`.
    thin: DenseMatrix<F>,
    /// `thinᵀ·thin`, `r × r`.
    w: DenseMatrix<F>,
    /// `tr(K) = ‖A‖_F²`.
    trace: F,
    /// `S_base · thin`, `m × r`.
    y: DenseMatrix<F>,
    /// `y·yᵀ`, `m × m`.
    g: DenseMatrix<F>,
}

impl<F: Scalar> ProxyEvaluator<F> {
    fn new(tr: &TrainSet<F>, k: usize, proxy: ProxyKind, m: usize) -> Self {
        let members: Vec<MemberState<F>> = tr
            .members()
            .iter()
            .map(|a| {
                let (thin, w, trace) = match proxy {
                    ProxyKind::Rowspace => {
                        // K = A·Aᵀ = U Λ Uᵀ → M = U Λ^{1/2}, W = Λ.
                        let gram = gram_of_rows(a);
                        let trace = (0..gram.rows()).map(|i| gram[(i, i)]).sum();
                        let (lam, u) = matlin::sym_eigen(&gram);
                        let lmax = lam.first().copied().unwrap_or(F::zero()).max(F::zero());
                        let tol = lmax * cast::<F>(RANK_REL_TOL);
                        let r = lam.iter().filter(|&&x| x > tol).count().max(1);
                        let mut thin = DenseMatrix::zeros(gram.rows(), r);
                        let mut w = DenseMatrix::zeros(r, r);
                        for j in 0..r {
                            let root = lam[j].max(F::zero()).sqrt();
                            w[(j, j)] = lam[j].max(F::zero());
                            for i in 0..gram.rows() {
                                thin[(i, j)] = u[(i, j)] * root;
                            }
                        }
                        (thin, w, trace)
                    }
                    ProxyKind::Colspace => {
                        // K = AᵀA = (Aᵀ)(Aᵀ)ᵀ → M = Aᵀ, W = A·Aᵀ.
                        let thin = a.transpose();
                        let w = gram_of_rows(a);
                        let trace = (0..w.rows()).map(|i| w[(i, i)]).sum();
                        (thin, w, trace)
                    }
                };
                let r = thin.cols();
                MemberState {
                    thin,
                    w,
                    trace,
                    y: DenseMatrix::zeros(m, r),
                    g: DenseMatrix::zeros(m, m),
                }
            })
            .collect();
        let n = members[0].thin.rows();
        ProxyEvaluator {
            members,
            n,
            m,
            k,
            base_p: vec![0; n],
            base_v: vec![F::zero(); n],
        }
    }

    fn member_count(&self) -> F {
        F::from(self.members.len()).unwrap()
    }

    /// Captured-spectrum loss for one member given `G = Y·Yᵀ`, where rows
    /// of `Y` listed in `overrides` replace the stored base rows.
    fn loss_from_g(
        &self,
        member: &MemberState<F>,
        g: &DenseMatrix<F>,
        overrides: &[(usize, Vec<F>)],
    ) -> F {
        let (lam, u) = matlin::sym_eigen(g);
        let lmax = lam.first().copied().unwrap_or(F::zero()).max(F::zero());
        let tol = lmax * cast::<F>(RANK_REL_TOL);
        let rank = lam.iter().filter(|&&x| x > tol).count();
        if rank == 0 {
            return member.trace;
        }
        let r = member.thin.cols();
        let row_of = |b: usize| -> &[F] {
            overrides
                .iter()
                .find(|(bb, _)| *bb == b)
                .map(|(_, row)| row.as_slice())
                .unwrap_or_else(|| member.y.row(b))
        };
        // V = Yᵀ U_r Λ_r^{-1/2} (r × rank).
        let mut v = DenseMatrix::zeros(r, rank);
        for b in 0..self.m {
            let row = row_of(b);
            for j in 0..rank {
                let coef = u[(b, j)];
                if coef == F::zero() {
                    continue;
                }
                for (t, &x) in row.iter().enumerate() {
                    v[(t, j)] += coef * x;
                }
            }
        }
        for j in 0..rank {
            let scale = F::one() / lam[j].sqrt();
            for t in 0..r {
                v[(t, j)] *= scale;
            }
        }
        // B = Vᵀ W V.
        let wv = member.w.matmul(&v); // r × rank
        let mut b = DenseMatrix::zeros(rank, rank);
        for i in 0..rank {
            for j in 0..rank {
                let mut acc = F::zero();
                for t in 0..r {
                    acc += v[(t, i)] * wv[(t, j)];
                }
                b[(i, j)] = acc;
            }
        }
        let (mut evals, _) = matlin::sym_eigen(&b);
        evals.truncate(self.k.min(rank));
        let captured: F = evals.into_iter().map(|x| x.max(F::zero())).sum();
        (member.trace - captured).max(F::zero())
    }

    /// Install a full sketch as the probe base (rebuilds `Y` and `G`).
    fn set_base(&mut self, p: &[usize], v: &[F]) {
        self.base_p.copy_from_slice(p);
        self.base_v.copy_from_slice(v);
        let m = self.m;
        let n = self.n;
        for member in &mut self.members {
            let r = member.thin.cols();
            let mut y = DenseMatrix::zeros(m, r);
            for i in 0..n {
                if v[i] == F::zero() {
                    continue;
                }
                let w = v[i];
                let dst = y.row_mut(p[i]);
                for (o, &x) in dst.iter_mut().zip(member.thin.row(i)) {
                    *o += w * x;
                }
            }
            member.g = gram_of_rows(&y);
            member.y = y;
        }
    }

    /// Move one column of the base sketch to `(bin, val)`.
    fn commit_column(&mut self, col: usize, bin: usize, val: F) {
        let (b0, v0) = (self.base_p[col], self.base_v[col]);
        for member in &mut self.members {
            let r = member.thin.cols();
            for t in 0..r {
                let x = member.thin[(col, t)];
                if v0 != F::zero() {
                    member.y[(b0, t)] -= v0 * x;
                }
                if val != F::zero() {
                    member.y[(bin, t)] += val * x;
                }
            }
            member.g = gram_of_rows(&member.y);
        }
        self.base_p[col] = bin;
        self.base_v[col] = val;
    }

    /// Loss of the base sketch with one column overridden; the base is
    /// untouched, so probes can run in parallel.
    fn probe_column(&self, col: usize, bin: usize, val: F) -> F {
        let (b0, v0) = (self.base_p[col], self.base_v[col]);
        let mut total = F::zero();
        let mut comp = F::zero();
        for member in &self.members {
            let mcol = member.thin.row(col);
            // Rows of Y that change under the override.
            let mut overrides: Vec<(usize, Vec<F>)> = Vec::with_capacity(2);
            if b0 == bin {
                if val != v0 {
                    let delta = val - v0;
                    let row: Vec<F> = member
                        .y
                        .row(b0)
                        .iter()
                        .zip(mcol)
                        .map(|(&y, &x)| y + delta * x)
                        .collect();
                    overrides.push((b0, row));
                }
            } else {
                if v0 != F::zero() {
                    let row: Vec<F> = member
                        .y
                        .row(b0)
                        .iter()
                        .zip(mcol)
                        .map(|(&y, &x)| y - v0 * x)
                        .collect();
                    overrides.push((b0, row));
                }
                if val != F::zero() {
                    let row: Vec<F> = member
                        .y
                        .row(bin)
                        .iter()
                        .zip(mcol)
                        .map(|(&y, &x)| y + val * x)
                        .collect();
                    overrides.push((bin, row));
                }
            }
            // Refresh the affected rows/columns of G.
            let mut g = member.g.clone();
            let row_of = |b: usize| -> &[F] {
                overrides
                    .iter()
                    .find(|(bb, _)| *bb == b)
                    .map(|(_, row)| row.as_slice())
                    .unwrap_or_else(|| member.y.row(b))
            };
            for (b, row) in &overrides {
                for j in 0..self.m {
                    let dot: F = row.iter().zip(row_of(j)).map(|(&x, &y)| x * y).sum();
                    g[(*b, j)] = dot;
                    g[(j, *b)] = dot;
                }
            }
            let y = self.loss_from_g(member, &g, &overrides) - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        total
    }

    /// Stateless full-sketch loss (compensated sum over members).
    fn loss_of(&self, p: &[usize], v: &[F]) -> F {
        let mut total = F::zero();
        let mut comp = F::zero();
        for member in &self.members {
            let r = member.thin.cols();
            let mut y = DenseMatrix::zeros(self.m, r);
            for i in 0..self.n {
                if v[i] == F::zero() {
                    continue;
                }
                let w = v[i];
                let dst = y.row_mut(p[i]);
                for (o, &x) in dst.iter_mut().zip(member.thin.row(i)) {
                    *o += w * x;
                }
            }
            let g = gram_of_rows(&y);
            let overrides: Vec<(usize, Vec<F>)> =
                (0..self.m).map(|b| (b, y.row(b).to_vec())).collect();
            let yl = self.loss_from_g(member, &g, &overrides) - comp;
            let t = total + yl;
            comp = (t - total) - yl;
            total = t;
        }
        total
    }

    fn base_loss(&self) -> F {
        let mut total = F::zero();
        let mut comp = F::zero();
        for member in &self.members {
            let y = self.loss_from_g(member, &member.g, &[]) - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        total
    }
}

fn gram_of_rows<F: Scalar>(a: &DenseMatrix<F>) -> DenseMatrix<F> {
    let n = a.rows();
    let mut g = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let ri = a.row(i);
        for j in i..n {
            let dot: F = ri.iter().zip(a.row(j)).map(|(&x, &y)| x * y).sum();
            g[(i, j)] = dot;
            g[(j, i)] = dot;
        }
    }
    g
}

// ── Greedy position optimization ────────────────────────────────────

fn visit_order<F: Scalar>(evaluator: &ProxyEvaluator<F>, rule: OrderingRule) -> Vec<usize> {
    let n = evaluator.n;
    match rule {
        OrderingRule::ColumnOrder => (0..n).collect(),
        OrderingRule::NonincreasingNorm => {
            // Squared row norms are the thin factors' row norms; order by
            // the max over members.
            let mut key: Vec<F> = vec![F::zero(); n];
            for member in &evaluator.members {
                for i in 0..n {
                    let sq: F = member.thin.row(i).iter().map(|&x| x * x).sum();
                    key[i] = key[i].max(sq);
                }
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| key[y].partial_cmp(&key[x]).unwrap().then(x.cmp(&y)));
            order
        }
        OrderingRule::Random(seed) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            order
        }
    }
}

/// Greedy placement: starting from the all-zero sketch, visit columns in
/// the configured order and commit, per column, the (bin, sign) pair that
/// minimizes the summed proxy loss over the training set. Ties break to
/// the smallest bin, then `+1`. The result has one `±1` entry per column.
pub fn greedy_positions<F: Scalar>(tr: &TrainSet<F>, cfg: &GreedyConfig) -> Result<CountSketch<F>> {
    cfg.validate()?;
    let mut evaluator = ProxyEvaluator::new(tr, cfg.k, cfg.proxy, cfg.m);
    let n = evaluator.n;
    let order = visit_order(&evaluator, cfg.ordering);

    let signs = cfg.signs.candidates();
    let candidates: Vec<(usize, usize)> = (0..cfg.m)
        .flat_map(|bin| (0..signs.len()).map(move |sr| (bin, sr)))
        .collect();

    let mut p = vec![0usize; n];
    let mut v = vec![F::zero(); n];
    evaluator.set_base(&p, &v);
    for &col in &order {
        // Candidate losses are evaluated independently (possibly in
        // parallel); the commit is the argmin in canonical candidate
        // order, so the result never depends on scheduling.
        let losses: Vec<F> = candidates
            .par_iter()
            .map(|&(bin, sign_rank)| {
                let val = if signs[sign_rank] > 0 { F::one() } else { -F::one() };
                evaluator.probe_column(col, bin, val)
            })
            .collect();
        let mut best = 0usize;
        for i in 1..losses.len() {
            if losses[i] < losses[best] {
                best = i;
            }
        }
        let (bin, sign_rank) = candidates[best];
        p[col] = bin;
        v[col] = if signs[sign_rank] > 0 { F::one() } else { -F::one() };
        evaluator.commit_column(col, bin, v[col]);
    }
    CountSketch::new(cfg.m, p, v)
}

/// Train the LRA pair: `S` against the rowspace proxy and `R` against the
/// colspace proxy, independently.
pub fn greedy_positions_lra_pair<F: Scalar>(
    tr: &TrainSet<F>,
    cfg_s: &GreedyConfig,
    cfg_r: &GreedyConfig,
) -> Result<(CountSketch<F>, CountSketch<F>)> {
    if cfg_s.proxy != ProxyKind::Rowspace || cfg_r.proxy != ProxyKind::Colspace {
        return Err(Error::InvalidInput(
            "pair training expects a rowspace config for S and a colspace config for R".into(),
        ));
    }
    Ok((greedy_positions(tr, cfg_s)?, greedy_positions(tr, cfg_r)?))
}

// ── Value optimization ──────────────────────────────────────────────

/// Gradient descent on the values with positions held fixed. The
/// gradient is central finite differences of the mean proxy loss
/// (`h = 1e-5·(1+|vᵢ|)` per coordinate) and each step backtracks —
/// halving the step size — whenever the loss would increase, so the
/// returned trace is non-increasing. Stops early when no improving step
/// exists.
pub fn optimize_values<F: Scalar>(
    tr: &TrainSet<F>,
    positions: &[usize],
    v0: &[F],
    k: usize,
    proxy: ProxyKind,
    steps: usize,
    step_size: f64,
) -> Result<(Vec<F>, Vec<F>)> {
    if positions.len() != v0.len() {
        return Err(Error::InvalidInput("positions/values length mismatch".into()));
    }
    if step_size <= 0.0 {
        return Err(Error::InvalidInput("step size must be positive".into()));
    }
    let m = positions.iter().copied().max().map_or(1, |x| x + 1);
    let mut evaluator = ProxyEvaluator::new(tr, k, proxy, m);
    if positions.len() != evaluator.n {
        return Err(Error::InvalidInput(format!(
            "sketch over {} inputs does not match proxy dimension {}",
            positions.len(),
            evaluator.n
        )));
    }
    let n = evaluator.n;
    let members = evaluator.member_count();

    let mut v: Vec<F> = v0.to_vec();
    evaluator.set_base(positions, &v);
    let mut loss = evaluator.base_loss() / members;
    if !loss.is_finite() {
        return Err(Error::NonFinite("initial proxy loss".into()));
    }
    let mut trace = vec![loss];

    for _step in 0..steps {
        // Central finite differences; each coordinate is a single-column
        // probe of the cached base.
        let grad: Vec<F> = (0..n)
            .into_par_iter()
            .map(|i| {
                let h = cast::<F>(1e-5) * (F::one() + v[i].abs());
                let up = evaluator.probe_column(i, positions[i], v[i] + h) / members;
                let down = evaluator.probe_column(i, positions[i], v[i] - h) / members;
                (up - down) / (cast::<F>(2.0) * h)
            })
            .collect();

        let mut eta = cast::<F>(step_size);
        let mut accepted = false;
        for _halving in 0..40 {
            let cand: Vec<F> = v.iter().zip(&grad).map(|(&x, &g)| x - eta * g).collect();
            let cand_loss = evaluator.loss_of(positions, &cand) / members;
            if !cand_loss.is_finite() {
                return Err(Error::NonFinite("proxy loss during line search".into()));
            }
            if cand_loss <= loss {
                v = cand;
                loss = cand_loss;
                accepted = true;
                break;
            }
            eta *= cast::<F>(0.5);
        }
        if !accepted {
            break;
        }
        evaluator.set_base(positions, &v);
        trace.push(loss);
    }
    Ok((v, trace))
}

/// Value descent against an arbitrary loss — the hook for training on
/// something other than the subspace proxy (for instance the full
/// sketched-pipeline cost). Same scheme as [`optimize_values`]: central
/// finite differences, backtracking halving, non-increasing trace, early
/// stop when no improving step exists. Each gradient step costs `2n`
/// loss evaluations, so prefer [`optimize_values`] when the proxy is the
/// objective.
pub fn descend_values<F, L>(
    v0: &[F],
    steps: usize,
    step_size: f64,
    loss_fn: L,
) -> Result<(Vec<F>, Vec<F>)>
where
    F: Scalar,
    L: Fn(&[F]) -> Result<F> + Sync,
{
    if step_size <= 0.0 {
        return Err(Error::InvalidInput("step size must be positive".into()));
    }
    let n = v0.len();
    let mut v: Vec<F> = v0.to_vec();
    let mut loss = loss_fn(&v)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite("initial loss".into()));
    }
    let mut trace = vec![loss];

    for _step in 0..steps {
        let grad: Vec<F> = (0..n)
            .into_par_iter()
            .map(|i| {
                let h = cast::<F>(1e-5) * (F::one() + v[i].abs());
                let mut probe = v.clone();
                probe[i] = v[i] + h;
                let up = loss_fn(&probe)?;
                probe[i] = v[i] - h;
                let down = loss_fn(&probe)?;
                Ok((up - down) / (cast::<F>(2.0) * h))
            })
            .collect::<Result<_>>()?;

        let mut eta = cast::<F>(step_size);
        let mut accepted = false;
        for _halving in 0..40 {
            let cand: Vec<F> = v.iter().zip(&grad).map(|(&x, &g)| x - eta * g).collect();
            let cand_loss = loss_fn(&cand)?;
            if !cand_loss.is_finite() {
                return Err(Error::NonFinite("loss during line search".into()));
            }
            if cand_loss <= loss {
                v = cand;
                loss = cand_loss;
                accepted = true;
                break;
            }
            eta *= cast::<F>(0.5);
        }
        if !accepted {
            break;
        }
        trace.push(loss);
    }
    Ok((v, trace))
}

/// Greedy placement followed by value optimization.
pub fn train_pipeline<F: Scalar>(
    tr: &TrainSet<F>,
    cfg: &GreedyConfig,
    value_steps: usize,
    step_size: f64,
) -> Result<CountSketch<F>> {
    let placed = greedy_positions(tr, cfg)?;
    let (values, _) = optimize_values(
        tr,
        placed.positions(),
        placed.values(),
        cfg.k,
        cfg.proxy,
        value_steps,
        step_size,
    )?;
    placed.with_values(values)
}

/// Value-only learning: random positions and signs, then value descent.
pub fn ivy19_baseline<F: Scalar>(
    tr: &TrainSet<F>,
    m: usize,
    k: usize,
    proxy: ProxyKind,
    seed: u64,
    value_steps: usize,
    step_size: f64,
) -> Result<CountSketch<F>> {
    let n = match proxy {
        ProxyKind::Rowspace => tr.rows(),
        ProxyKind::Colspace => tr.cols(),
    };
    let start = CountSketch::random(m, n, seed)?;
    let (values, _) = optimize_values(
        tr,
        start.positions(),
        start.values(),
        k,
        proxy,
        value_steps,
        step_size,
    )?;
    start.with_values(values)
}

/// Which side a single-sample dense baseline compresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchSide {
    /// Row compression `S` (`m × n`): top-m left singular vectors.
    Rows,
    /// Column compression `R` (`m × d`): top-m right singular vectors.
    Cols,
}

/// Dense baseline built from one training sample: the top-`m` singular
/// vectors of the sample, used directly as the compression matrix.
pub fn exact_svd_sketch<F: Scalar>(
    sample: &DenseMatrix<F>,
    m: usize,
    side: SketchSide,
) -> Result<DenseMatrix<F>> {
    if m == 0 || m > sample.rows().min(sample.cols()) {
        return Err(Error::InvalidInput(format!(
            "need 1 ≤ m ≤ min(dims), got m = {m} for {}x{}",
            sample.rows(),
            sample.cols()
        )));
    }
    let s = matlin::svd(sample, Some(m))?;
    Ok(match side {
        SketchSide::Rows => s.u.transpose(),
        SketchSide::Cols => s.v.transpose(),
    })
}

/// Row-sampling baseline from one training sample: `m` distinct rows
/// drawn with probability proportional to squared row norm, each placed
/// in its own bin with value `1/‖row‖`; unsampled columns get value 0.
pub fn column_sampling_sketch<F: Scalar>(
    sample: &DenseMatrix<F>,
    m: usize,
    seed: u64,
) -> Result<CountSketch<F>> {
    let n = sample.rows();
    let mut weights: Vec<F> = (0..n)
        .map(|i| sample.row(i).iter().map(|&x| x * x).sum())
        .collect();
    let nonzero = weights.iter().filter(|&&w| w > F::zero()).count();
    if nonzero == 0 {
        return Err(Error::InvalidInput("all-zero sample".into()));
    }
    if m == 0 || m > nonzero {
        return Err(Error::InvalidInput(format!(
            "cannot sample {m} distinct rows from {nonzero} with nonzero norm"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = vec![0usize; n];
    let mut v = vec![F::zero(); n];
    for bin in 0..m {
        let total: F = weights.iter().copied().sum();
        let mut target = F::from(rand::Rng::random::<f64>(&mut rng)).unwrap() * total;
        let mut pick = n - 1;
        for (i, &w) in weights.iter().enumerate() {
            if w <= F::zero() {
                continue;
            }
            if target < w {
                pick = i;
                break;
            }
            target -= w;
        }
        p[pick] = bin;
        v[pick] = F::one() / weights[pick].sqrt();
        weights[pick] = F::zero();
    }
    CountSketch::new(m, p, v)
}
