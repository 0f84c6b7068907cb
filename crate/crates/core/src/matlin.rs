//! Dense linear-algebra kernels: SVD, QR, pseudo-inverse, rank-k
//! truncation and a rank-1 SVD update.
//!
//! Everything here is deterministic for fixed input bytes: the SVD is a
//! one-sided Jacobi iteration with a fixed sweep order, QR is Householder
//! with a fixed sign convention, and singular vectors are normalized so
//! the largest-magnitude entry of each left singular vector is
//! non-negative.

use crate::{cast, Error, Result, Scalar, RANK_REL_TOL};

// ── DenseMatrix ─────────────────────────────────────────────────────

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    /// Build from row-major data, validating shape and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::InvalidInput(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("matrix with zero rows".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn diag(entries: &[F]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self · other`; panics on shape mismatch (internal use — public
    /// operations validate shapes up front).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} · {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == F::zero() {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, c: F) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    /// Squared Frobenius norm.
    pub fn frob_sq(&self) -> F {
        self.data.iter().map(|&x| x * x).sum()
    }

    pub fn max_abs(&self) -> F {
        self.data
            .iter()
            .fold(F::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Convert entries through `f64` (used by file I/O and mixed-precision tests).
    pub fn map_scalar<G: Scalar>(&self) -> DenseMatrix<G> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|&x| cast::<G>(x.to_f64().unwrap()))
                .collect(),
        }
    }
}

impl<F: Scalar> std::ops::Index<(usize, usize)> for DenseMatrix<F> {
    type Output = F;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F: Scalar> std::ops::IndexMut<(usize, usize)> for DenseMatrix<F> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

// ── SVD ─────────────────────────────────────────────────────────────

/// Thin singular value decomposition `A = U · diag(σ) · Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult<F> {
    /// Left singular vectors, one per column.
    pub u: DenseMatrix<F>,
    /// Singular values, non-negative and non-increasing.
    pub sigma: Vec<F>,
    /// Right singular vectors, one per column.
    pub v: DenseMatrix<F>,
}

impl<F: Scalar> SvdResult<F> {
    /// `U · diag(σ) · Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix<F> {
        let r = self.sigma.len();
        let mut out = DenseMatrix::zeros(self.u.rows(), self.v.rows());
        for k in 0..r {
            let s = self.sigma[k];
            if s == F::zero() {
                continue;
            }
            for i in 0..self.u.rows() {
                let us = self.u[(i, k)] * s;
                for j in 0..self.v.rows() {
                    out[(i, j)] += us * self.v[(j, k)];
                }
            }
        }
        out
    }

    /// Number of singular values above `RANK_REL_TOL · σ_max`.
    pub fn rank(&self) -> usize {
        let smax = self.sigma.first().copied().unwrap_or(F::zero());
        let tol = cast::<F>(RANK_REL_TOL) * smax;
        self.sigma.iter().filter(|&&s| s > tol).count()
    }

    pub fn truncated(&self, r: usize) -> SvdResult<F> {
        SvdResult {
            u: take_cols(&self.u, r),
            sigma: self.sigma[..r.min(self.sigma.len())].to_vec(),
            v: take_cols(&self.v, r),
        }
    }
}

fn take_cols<F: Scalar>(m: &DenseMatrix<F>, r: usize) -> DenseMatrix<F> {
    let r = r.min(m.cols());
    let mut out = DenseMatrix::zeros(m.rows(), r);
    for i in 0..m.rows() {
        for j in 0..r {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

/// Top-`r` (or full, when `r` is `None`) singular triplets of `A`.
///
/// One-sided Jacobi on the tall orientation; deterministic sweep order,
/// singular values sorted non-increasing, and each U column's
/// largest-magnitude entry forced non-negative.
pub fn svd<F: Scalar>(a: &DenseMatrix<F>, r: Option<usize>) -> Result<SvdResult<F>> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidInput("svd of dimension-zero matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input".into()));
    }
    let full = a.rows().min(a.cols());
    let r = r.unwrap_or(full);
    if r > full {
        return Err(Error::InvalidInput(format!(
            "requested {r} singular triplets from a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }

    let res = if a.rows() >= a.cols() {
        jacobi_svd_tall(a)
    } else {
        // SVD of Aᵀ = U Σ Vᵀ gives A = V Σ Uᵀ.
        let t = jacobi_svd_tall(&a.transpose());
        SvdResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }
    };
    let mut res = res;
    fix_signs(&mut res);
    Ok(res.truncated(r))
}

/// One-sided Jacobi SVD for `rows >= cols`.
fn jacobi_svd_tall<F: Scalar>(a: &DenseMatrix<F>) -> SvdResult<F> {
    let (m, n) = (a.rows(), a.cols());
    let mut b = a.clone();
    let mut v = DenseMatrix::identity(n);
    let eps = F::epsilon();

    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let mut alpha = F::zero();
                let mut beta = F::zero();
                let mut gamma = F::zero();
                for i in 0..m {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    alpha += bp * bp;
                    beta += bq * bq;
                    gamma += bp * bq;
                }
                if alpha == F::zero() || beta == F::zero() {
                    continue;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (cast::<F>(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (F::one() + zeta * zeta).sqrt());
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = c * bp - s * bq;
                    b[(i, q)] = s * bp + c * bq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values; sort them non-increasing.
    let mut norms: Vec<F> = (0..n)
        .map(|j| (0..m).map(|i| b[(i, j)] * b[(i, j)]).sum::<F>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap().then(x.cmp(&y)));

    let mut u = DenseMatrix::zeros(m, n);
    let mut vv = DenseMatrix::zeros(n, n);
    let mut sigma = vec![F::zero(); n];
    let smax = order.first().map(|&j| norms[j]).unwrap_or(F::zero());
    let tiny = smax * cast::<F>(RANK_REL_TOL);
    for (dst, &src) in order.iter().enumerate() {
        sigma[dst] = norms[src];
        for i in 0..n {
            vv[(i, dst)] = v[(i, src)];
        }
        if norms[src] > tiny && norms[src] > F::zero() {
            for i in 0..m {
                u[(i, dst)] = b[(i, src)] / norms[src];
            }
        }
    }
    norms.clear();
    complete_orthonormal_columns(&mut u, &sigma, tiny);
    SvdResult { u, sigma, v: vv }
}

/// Replace the (zeroed) U columns of negligible singular values with unit
/// vectors orthogonal to the rest, so `UᵀU = I` holds at every rank.
fn complete_orthonormal_columns<F: Scalar>(u: &mut DenseMatrix<F>, sigma: &[F], tiny: F) {
    let (m, n) = (u.rows(), u.cols());
    let mut next_seed = 0usize;
    for j in 0..n {
        if sigma[j] > tiny && sigma[j] > F::zero() {
            continue;
        }
        // Orthogonalize standard basis vectors against the columns built
        // so far and keep the first that survives.
        'seed: while next_seed < m {
            let mut cand = vec![F::zero(); m];
            cand[next_seed] = F::one();
            next_seed += 1;
            for _pass in 0..2 {
                for jj in 0..n {
                    if jj == j || (sigma[jj] <= tiny && jj > j) {
                        continue;
                    }
                    let dot: F = (0..m).map(|i| cand[i] * u[(i, jj)]).sum();
                    for i in 0..m {
                        cand[i] -= dot * u[(i, jj)];
                    }
                }
            }
            let norm: F = cand.iter().map(|&x| x * x).sum::<F>().sqrt();
            if norm > cast::<F>(0.5) {
                for i in 0..m {
                    u[(i, j)] = cand[i] / norm;
                }
                break 'seed;
            }
        }
    }
}

/// Flip singular-vector pairs so each U column's largest-|entry| is `>= 0`.
fn fix_signs<F: Scalar>(res: &mut SvdResult<F>) {
    let (m, n) = (res.u.rows(), res.u.cols());
    for j in 0..n {
        let mut best = 0usize;
        for i in 1..m {
            if res.u[(i, j)].abs() > res.u[(best, j)].abs() {
                best = i;
            }
        }
        if res.u[(best, j)] < F::zero() {
            for i in 0..m {
                res.u[(i, j)] = -res.u[(i, j)];
            }
            for i in 0..res.v.rows() {
                res.v[(i, j)] = -res.v[(i, j)];
            }
        }
    }
}

// ── Rank-k truncation ───────────────────────────────────────────────

/// Best rank-`k` approximation `[A]_k = U_k Σ_k V_kᵀ`.
pub fn truncate_rank_k<F: Scalar>(a: &DenseMatrix<F>, k: usize) -> Result<DenseMatrix<F>> {
    if k == 0 || k > a.rows().min(a.cols()) {
        return Err(Error::InvalidInput(format!(
            "rank {k} out of range for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    Ok(svd(a, Some(k))?.reconstruct())
}

// ── QR ──────────────────────────────────────────────────────────────

/// Thin Householder QR: `A = Q R` with `Q` (`m × min(m,n)`) having
/// orthonormal columns and `R` (`min(m,n) × n`) upper-triangular.
pub fn qr<F: Scalar>(a: &DenseMatrix<F>) -> Result<(DenseMatrix<F>, DenseMatrix<F>)> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidInput("qr of dimension-zero matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("qr input".into()));
    }
    let (m, n) = (a.rows(), a.cols());
    let r = m.min(n);
    let mut work = a.clone();
    // Householder vectors, one per reflection.
    let mut vs: Vec<Vec<F>> = Vec::with_capacity(r);

    for kk in 0..r {
        let mut norm_sq = F::zero();
        for i in kk..m {
            norm_sq += work[(i, kk)] * work[(i, kk)];
        }
        let norm = norm_sq.sqrt();
        let mut vcol = vec![F::zero(); m];
        if norm > F::zero() {
            let x0 = work[(kk, kk)];
            let alpha = if x0 >= F::zero() { -norm } else { norm };
            vcol[kk] = x0 - alpha;
            for i in (kk + 1)..m {
                vcol[i] = work[(i, kk)];
            }
            let vnorm_sq: F = vcol.iter().map(|&x| x * x).sum();
            if vnorm_sq > F::zero() {
                // Apply H = I − 2vvᵀ/(vᵀv) to the trailing block.
                for j in kk..n {
                    let dot: F = (kk..m).map(|i| vcol[i] * work[(i, j)]).sum();
                    let tau = cast::<F>(2.0) * dot / vnorm_sq;
                    for i in kk..m {
                        work[(i, j)] -= tau * vcol[i];
                    }
                }
            }
        }
        vs.push(vcol);
    }

    let mut rmat = DenseMatrix::zeros(r, n);
    for i in 0..r {
        for j in i..n {
            rmat[(i, j)] = work[(i, j)];
        }
    }
    // Q = H_0 H_1 … H_{r-1} · [I_r; 0]
    let mut q = DenseMatrix::zeros(m, r);
    for j in 0..r {
        q[(j, j)] = F::one();
    }
    for kk in (0..r).rev() {
        let vcol = &vs[kk];
        let vnorm_sq: F = vcol.iter().map(|&x| x * x).sum();
        if vnorm_sq == F::zero() {
            continue;
        }
        for j in 0..r {
            let dot: F = (kk..m).map(|i| vcol[i] * q[(i, j)]).sum();
            let tau = cast::<F>(2.0) * dot / vnorm_sq;
            for i in kk..m {
                q[(i, j)] -= tau * vcol[i];
            }
        }
    }
    // Normalize so R's diagonal is non-negative.
    for i in 0..r {
        if rmat[(i, i)] < F::zero() {
            for j in 0..n {
                rmat[(i, j)] = -rmat[(i, j)];
            }
            for row in 0..m {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    Ok((q, rmat))
}

/// Orthonormal basis of the column space of `a`, rank-revealed by pivoted
/// modified Gram-Schmidt with reorthogonalization. Columns of the result
/// span `col(a)`; the column count is the numerical rank.
pub fn colspace_basis<F: Scalar>(a: &DenseMatrix<F>) -> DenseMatrix<F> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<F>> = (0..n).map(|j| a.col(j)).collect();
    let mut norms: Vec<F> = cols.iter().map(|c| c.iter().map(|&x| x * x).sum()).collect();
    let max0 = norms.iter().fold(F::zero(), |acc, &x| acc.max(x));
    let cutoff = max0 * cast::<F>(RANK_REL_TOL * RANK_REL_TOL);
    let mut basis: Vec<Vec<F>> = Vec::new();
    let mut used = vec![false; n];

    loop {
        // Pivot: largest remaining squared norm, ties to smallest index.
        let mut pivot = None;
        for j in 0..n {
            if used[j] {
                continue;
            }
            if pivot.is_none_or(|p: usize| norms[j] > norms[p]) {
                pivot = Some(j);
            }
        }
        let Some(p) = pivot else { break };
        if norms[p] <= cutoff || norms[p] <= F::zero() {
            break;
        }
        used[p] = true;
        let mut vcol = cols[p].clone();
        // Two-pass reorthogonalization keeps the basis orthonormal to
        // working precision even for nearly dependent inputs.
        for _pass in 0..2 {
            for b in &basis {
                let dot: F = vcol.iter().zip(b).map(|(&x, &y)| x * y).sum();
                for (x, &y) in vcol.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
        }
        let norm: F = vcol.iter().map(|&x| x * x).sum::<F>().sqrt();
        if norm * norm <= cutoff || norm <= F::zero() {
            norms[p] = F::zero();
            continue;
        }
        for x in vcol.iter_mut() {
            *x /= norm;
        }
        basis.push(vcol);
        if basis.len() == m.min(n) {
            break;
        }
        // Deflate remaining columns against the new direction.
        let b = basis.last().unwrap();
        for j in 0..n {
            if used[j] {
                continue;
            }
            let dot: F = cols[j].iter().zip(b).map(|(&x, &y)| x * y).sum();
            for (x, &y) in cols[j].iter_mut().zip(b) {
                *x -= dot * y;
            }
            norms[j] = cols[j].iter().map(|&x| x * x).sum();
        }
    }

    let r = basis.len();
    let mut out = DenseMatrix::zeros(m, r);
    for (j, b) in basis.iter().enumerate() {
        for i in 0..m {
            out[(i, j)] = b[i];
        }
    }
    out
}

/// Orthonormal basis of the row space of `a` (as columns of a `cols × r`
/// matrix).
pub fn rowspace_basis<F: Scalar>(a: &DenseMatrix<F>) -> DenseMatrix<F> {
    colspace_basis(&a.transpose())
}

// ── Pseudo-inverse ──────────────────────────────────────────────────

/// Moore-Penrose pseudo-inverse `A† = V Σ⁻¹ Uᵀ`; singular values at or
/// below `RANK_REL_TOL · σ_max` are left un-inverted.
pub fn pseudo_inverse<F: Scalar>(a: &DenseMatrix<F>) -> Result<DenseMatrix<F>> {
    let s = svd(a, None)?;
    let smax = s.sigma.first().copied().unwrap_or(F::zero());
    let tol = smax * cast::<F>(RANK_REL_TOL);
    let mut out = DenseMatrix::zeros(a.cols(), a.rows());
    for k in 0..s.sigma.len() {
        if s.sigma[k] <= tol {
            continue;
        }
        let inv = F::one() / s.sigma[k];
        for i in 0..a.cols() {
            let vi = s.v[(i, k)] * inv;
            for j in 0..a.rows() {
                out[(i, j)] += vi * s.u[(j, k)];
            }
        }
    }
    Ok(out)
}

// ── Rank-1 SVD update ───────────────────────────────────────────────

/// SVD of `M + a·bᵀ` from the SVD of `M`, without touching `M` itself.
///
/// Optional accelerator for the greedy placement loop; the caller can
/// always recompute from scratch instead.
pub fn rank1_svd_update<F: Scalar>(s: &SvdResult<F>, a: &[F], b: &[F]) -> Result<SvdResult<F>> {
    let m = s.u.rows();
    let d = s.v.rows();
    let r = s.sigma.len();
    if a.len() != m || b.len() != d {
        return Err(Error::InvalidInput(format!(
            "rank-1 update vectors {}/{} do not match factor shapes {m}/{d}",
            a.len(),
            b.len()
        )));
    }
    let anorm: F = a.iter().map(|&x| x * x).sum::<F>().sqrt();
    let bnorm: F = b.iter().map(|&x| x * x).sum::<F>().sqrt();
    if anorm == F::zero() || bnorm == F::zero() {
        return Ok(s.clone());
    }

    // Residuals of a (resp. b) against the current column spaces.
    let mvec: Vec<F> = (0..r).map(|k| (0..m).map(|i| s.u[(i, k)] * a[i]).sum()).collect();
    let mut p_res: Vec<F> = a.to_vec();
    for k in 0..r {
        for i in 0..m {
            p_res[i] -= s.u[(i, k)] * mvec[k];
        }
    }
    let p_norm: F = p_res.iter().map(|&x| x * x).sum::<F>().sqrt();
    let extend_u = p_norm > anorm * cast::<F>(1e-13) && r < m;

    let nvec: Vec<F> = (0..r).map(|k| (0..d).map(|i| s.v[(i, k)] * b[i]).sum()).collect();
    let mut q_res: Vec<F> = b.to_vec();
    for k in 0..r {
        for i in 0..d {
            q_res[i] -= s.v[(i, k)] * nvec[k];
        }
    }
    let q_norm: F = q_res.iter().map(|&x| x * x).sum::<F>().sqrt();
    let extend_v = q_norm > bnorm * cast::<F>(1e-13) && r < d;

    let ru = r + usize::from(extend_u);
    let rv = r + usize::from(extend_v);
    let mut core = DenseMatrix::zeros(ru, rv);
    for k in 0..r {
        core[(k, k)] = s.sigma[k];
    }
    let mut left = mvec;
    if extend_u {
        left.push(p_norm);
    }
    let mut right = nvec;
    if extend_v {
        right.push(q_norm);
    }
    for (i, &x) in left.iter().enumerate() {
        for (j, &y) in right.iter().enumerate() {
            core[(i, j)] += x * y;
        }
    }

    let cs = svd(&core, None)?;
    let rc = cs.sigma.len();
    let mut u_new = DenseMatrix::zeros(m, rc);
    for i in 0..m {
        for j in 0..rc {
            let mut acc = F::zero();
            for k in 0..r {
                acc += s.u[(i, k)] * cs.u[(k, j)];
            }
            if extend_u {
                acc += (p_res[i] / p_norm) * cs.u[(r, j)];
            }
            u_new[(i, j)] = acc;
        }
    }
    let mut v_new = DenseMatrix::zeros(d, rc);
    for i in 0..d {
        for j in 0..rc {
            let mut acc = F::zero();
            for k in 0..r {
                acc += s.v[(i, k)] * cs.v[(k, j)];
            }
            if extend_v {
                acc += (q_res[i] / q_norm) * cs.v[(r, j)];
            }
            v_new[(i, j)] = acc;
        }
    }
    let mut res = SvdResult {
        u: u_new,
        sigma: cs.sigma,
        v: v_new,
    };
    fix_signs(&mut res);
    Ok(res)
}

// ── Symmetric eigendecomposition ────────────────────────────────────

/// Eigenvalues (non-increasing) and eigenvectors (columns) of a symmetric
/// matrix, by cyclic Jacobi rotations. Used by the Gram-matrix proxy
/// evaluation in `learn`.
pub fn sym_eigen<F: Scalar>(a: &DenseMatrix<F>) -> (Vec<F>, DenseMatrix<F>) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "sym_eigen needs a square matrix");
    let mut w = a.clone();
    let mut q = DenseMatrix::identity(n);
    let eps = F::epsilon();
    let scale = w.max_abs().max(F::min_positive_value());

    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for qq in (p + 1)..n {
                let apq = w[(p, qq)];
                if apq.abs() <= eps * scale {
                    continue;
                }
                rotated = true;
                let app = w[(p, p)];
                let aqq = w[(qq, qq)];
                let zeta = (aqq - app) / (cast::<F>(2.0) * apq);
                let t = zeta.signum() / (zeta.abs() + (F::one() + zeta * zeta).sqrt());
                let c = F::one() / (F::one() + t * t).sqrt();
                let sgn = c * t;
                for i in 0..n {
                    let wip = w[(i, p)];
                    let wiq = w[(i, qq)];
                    w[(i, p)] = c * wip - sgn * wiq;
                    w[(i, qq)] = sgn * wip + c * wiq;
                }
                for j in 0..n {
                    let wpj = w[(p, j)];
                    let wqj = w[(qq, j)];
                    w[(p, j)] = c * wpj - sgn * wqj;
                    w[(qq, j)] = sgn * wpj + c * wqj;
                }
                for i in 0..n {
                    let qip = q[(i, p)];
                    let qiq = q[(i, qq)];
                    q[(i, p)] = c * qip - sgn * qiq;
                    q[(i, qq)] = sgn * qip + c * qiq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        w[(y, y)]
            .partial_cmp(&w[(x, x)])
            .unwrap()
            .then(x.cmp(&y))
    });
    let mut vals = Vec::with_capacity(n);
    let mut vecs = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(w[(src, src)]);
        for i in 0..n {
            vecs[(i, dst)] = q[(i, src)];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        DenseMatrix::from_vec(rows, cols, data).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (diff {})", (a - b).abs());
    }

    fn assert_orthonormal_cols(m: &DenseMatrix<f64>, tol: f64) {
        for j1 in 0..m.cols() {
            for j2 in 0..m.cols() {
                let dot: f64 = (0..m.rows()).map(|i| m[(i, j1)] * m[(i, j2)]).sum();
                let want = if j1 == j2 { 1.0 } else { 0.0 };
                assert_close(dot, want, tol);
            }
        }
    }

    #[test]
    fn svd_diagonal() {
        let a = DenseMatrix::diag(&[3.0, 1.0]);
        let s = svd(&a, None).unwrap();
        assert_close(s.sigma[0], 3.0, 1e-12);
        assert_close(s.sigma[1], 1.0, 1e-12);
        // U and V are the identity up to column signs; sign convention
        // forces the diagonal non-negative.
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_close(s.u[(i, j)], want, 1e-12);
                assert_close(s.v[(i, j)], want, 1e-12);
            }
        }
    }

    #[test]
    fn svd_identity_truncated() {
        let a = DenseMatrix::<f64>::identity(4);
        let s = svd(&a, Some(2)).unwrap();
        assert_eq!(s.sigma, vec![1.0, 1.0]);
        assert_eq!(s.u.cols(), 2);
    }

    #[test]
    fn svd_zero_dimension_rejected() {
        let a = DenseMatrix::<f64>::zeros(0, 3);
        assert!(matches!(svd(&a, None), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn svd_matches_gram_eigenvalues_oracle() {
        // Independent oracle: eigenvalues of AᵀA from a Rayleigh-quotient
        // free two-sided Jacobi implemented right here in the test.
        fn jacobi_eigvals(mut a: Vec<Vec<f64>>) -> Vec<f64> {
            let n = a.len();
            for _ in 0..100 {
                let mut off = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            off += a[i][j] * a[i][j];
                        }
                    }
                }
                if off < 1e-24 {
                    break;
                }
                for p in 0..n - 1 {
                    for q in p + 1..n {
                        if a[p][q].abs() < 1e-30 {
                            continue;
                        }
                        let theta = 0.5 * (2.0 * a[p][q]).atan2(a[p][p] - a[q][q]);
                        let (c, s) = (theta.cos(), theta.sin());
                        for i in 0..n {
                            let (aip, aiq) = (a[i][p], a[i][q]);
                            a[i][p] = c * aip + s * aiq;
                            a[i][q] = -s * aip + c * aiq;
                        }
                        for j in 0..n {
                            let (apj, aqj) = (a[p][j], a[q][j]);
                            a[p][j] = c * apj + s * aqj;
                            a[q][j] = -s * apj + c * aqj;
                        }
                    }
                }
            }
            let mut v: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
            v.sort_by(|x, y| y.partial_cmp(x).unwrap());
            v
        }

        let a = random_matrix(7, 5, 42);
        let gram = a.transpose().matmul(&a);
        let gram_rows: Vec<Vec<f64>> = (0..5).map(|i| gram.row(i).to_vec()).collect();
        let eigs = jacobi_eigvals(gram_rows);
        let s = svd(&a, None).unwrap();
        for (sig, eig) in s.sigma.iter().zip(&eigs) {
            assert_close(*sig, eig.max(0.0).sqrt(), 1e-8);
        }
    }

    #[test]
    fn svd_reconstruction_and_orthonormality() {
        for seed in 0..5u64 {
            let a = random_matrix(8, 5, seed);
            let s = svd(&a, None).unwrap();
            assert_orthonormal_cols(&s.u, 1e-9);
            assert_orthonormal_cols(&s.v, 1e-9);
            let rec = s.reconstruct();
            let rel = rec.sub(&a).frob_sq().sqrt() / a.frob_sq().sqrt();
            assert!(rel < 1e-8, "relative reconstruction error {rel}");
            for w in s.sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
            // ‖A‖_F² = Σ σ².
            let sum_sq: f64 = s.sigma.iter().map(|x| x * x).sum();
            assert_close(sum_sq, a.frob_sq(), 1e-8 * a.frob_sq());
        }
    }

    #[test]
    fn svd_wide_matrix() {
        let a = random_matrix(4, 9, 3);
        let s = svd(&a, None).unwrap();
        assert_eq!(s.u.rows(), 4);
        assert_eq!(s.v.rows(), 9);
        let rel = s.reconstruct().sub(&a).frob_sq().sqrt() / a.frob_sq().sqrt();
        assert!(rel < 1e-8);
    }

    #[test]
    fn svd_rank_deficient_keeps_orthonormal_u() {
        // Rank-1 matrix, full triplet request.
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![3.0, 6.0, 9.0],
        ])
        .unwrap();
        let s = svd(&a, None).unwrap();
        assert!(s.sigma[1] < 1e-9);
        assert_orthonormal_cols(&s.u, 1e-9);
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn svd_of_zero_matrix() {
        let a = DenseMatrix::<f64>::zeros(3, 2);
        let s = svd(&a, None).unwrap();
        assert_eq!(s.sigma, vec![0.0, 0.0]);
        assert_orthonormal_cols(&s.u, 1e-12);
    }

    #[test]
    fn truncate_diag_example() {
        let r2 = 2.0f64.sqrt();
        let a = DenseMatrix::diag(&[2.0, 2.0, r2, r2]);
        let t = truncate_rank_k(&a, 2).unwrap();
        let want = DenseMatrix::diag(&[2.0, 2.0, 0.0, 0.0]);
        assert!(t.sub(&want).frob_sq() < 1e-18);
        let residual = a.sub(&t).frob_sq();
        assert_close(residual, 4.0, 1e-9);
    }

    #[test]
    fn truncate_full_rank_is_identity() {
        let a = random_matrix(5, 4, 7);
        let t = truncate_rank_k(&a, 4).unwrap();
        assert!(t.sub(&a).frob_sq() < 1e-18);
    }

    #[test]
    fn truncate_beats_random_rank_k_candidates() {
        let a = random_matrix(6, 5, 11);
        let k = 2;
        let best = a.sub(&truncate_rank_k(&a, k).unwrap()).frob_sq();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let p = {
                let data: Vec<f64> = (0..6 * k).map(|_| rng.random_range(-1.0..1.0)).collect();
                DenseMatrix::from_vec(6, k, data).unwrap()
            };
            let q = {
                let data: Vec<f64> = (0..k * 5).map(|_| rng.random_range(-1.0..1.0)).collect();
                DenseMatrix::from_vec(k, 5, data).unwrap()
            };
            let cand = a.sub(&p.matmul(&q)).frob_sq();
            assert!(best <= cand + 1e-9);
        }
    }

    #[test]
    fn truncate_residual_nonincreasing_in_k() {
        let a = random_matrix(6, 6, 13);
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let res = a.sub(&truncate_rank_k(&a, k).unwrap()).frob_sq();
            assert!(res <= prev + 1e-12);
            prev = res;
        }
    }

    #[test]
    fn truncate_out_of_range() {
        let a = random_matrix(3, 3, 1);
        assert!(truncate_rank_k(&a, 0).is_err());
        assert!(truncate_rank_k(&a, 4).is_err());
    }

    #[test]
    fn qr_identity() {
        let a = DenseMatrix::<f64>::identity(3);
        let (q, r) = qr(&a).unwrap();
        assert!(q.sub(&a).frob_sq() < 1e-24);
        assert!(r.sub(&a).frob_sq() < 1e-24);
    }

    #[test]
    fn qr_single_column() {
        let a = DenseMatrix::<f64>::from_vec(2, 1, vec![3.0, 4.0]).unwrap();
        let (q, r) = qr(&a).unwrap();
        // Up to sign: Q = [0.6, 0.8]ᵀ, R = [5].
        assert_close(r[(0, 0)].abs(), 5.0, 1e-12);
        assert_close(q[(0, 0)].abs(), 0.6, 1e-12);
        assert_close(q[(1, 0)].abs(), 0.8, 1e-12);
        assert_close(q[(0, 0)] * r[(0, 0)], 3.0, 1e-12);
    }

    #[test]
    fn qr_reconstruction_oracle() {
        let a = random_matrix(8, 3, 21);
        let (q, r) = qr(&a).unwrap();
        assert_orthonormal_cols(&q, 1e-10);
        let rel = q.matmul(&r).sub(&a).frob_sq().sqrt() / a.frob_sq().sqrt();
        assert!(rel < 1e-10);
        for i in 0..r.rows() {
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn pinv_diag() {
        let a = DenseMatrix::diag(&[2.0, 0.0]);
        let p = pseudo_inverse(&a).unwrap();
        assert_close(p[(0, 0)], 0.5, 1e-12);
        assert_close(p[(1, 1)], 0.0, 1e-12);
    }

    #[test]
    fn pinv_orthonormal_is_transpose() {
        let a = random_matrix(6, 3, 5);
        let (q, _) = qr(&a).unwrap();
        let p = pseudo_inverse(&q).unwrap();
        assert!(p.sub(&q.transpose()).frob_sq() < 1e-18);
    }

    #[test]
    fn pinv_penrose_conditions() {
        let a = random_matrix(5, 3, 17);
        let p = pseudo_inverse(&a).unwrap();
        let apa = a.matmul(&p).matmul(&a);
        let pap = p.matmul(&a).matmul(&p);
        assert!(apa.sub(&a).frob_sq().sqrt() < 1e-8);
        assert!(pap.sub(&p).frob_sq().sqrt() < 1e-8);
        let ap = a.matmul(&p);
        let pa = p.matmul(&a);
        assert!(ap.sub(&ap.transpose()).frob_sq().sqrt() < 1e-8);
        assert!(pa.sub(&pa.transpose()).frob_sq().sqrt() < 1e-8);
    }

    #[test]
    fn pinv_involution_full_rank() {
        let a = random_matrix(4, 4, 23);
        let p = pseudo_inverse(&a).unwrap();
        let pp = pseudo_inverse(&p).unwrap();
        assert!(pp.sub(&a).frob_sq().sqrt() < 1e-8);
    }

    #[test]
    fn rank1_update_zero_vector_is_identity() {
        let m = random_matrix(4, 3, 31);
        let s = svd(&m, None).unwrap();
        let out = rank1_svd_update(&s, &[0.0; 4], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out.sigma, s.sigma);
        assert!(out.reconstruct().sub(&s.reconstruct()).frob_sq() < 1e-24);
    }

    #[test]
    fn rank1_update_from_zero_matrix() {
        let m = DenseMatrix::<f64>::zeros(3, 3);
        let s = svd(&m, None).unwrap();
        let a = [1.0, 0.0, 0.0];
        let b = [1.0, 0.0, 0.0];
        let out = rank1_svd_update(&s, &a, &b).unwrap();
        assert_close(out.sigma[0], 1.0, 1e-12);
        for &x in &out.sigma[1..] {
            assert!(x.abs() < 1e-12);
        }
    }

    #[test]
    fn rank1_update_matches_recompute() {
        for seed in 0..100u64 {
            let m = random_matrix(8, 6, 1000 + seed);
            let s = svd(&m, None).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let a: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let updated = rank1_svd_update(&s, &a, &b).unwrap();
            let mut target = m.clone();
            for i in 0..8 {
                for j in 0..6 {
                    target[(i, j)] += a[i] * b[j];
                }
            }
            let fresh = svd(&target, None).unwrap();
            let smax = fresh.sigma[0].max(1.0);
            for k in 0..fresh.sigma.len() {
                let got = updated.sigma.get(k).copied().unwrap_or(0.0);
                assert!(
                    (got - fresh.sigma[k]).abs() <= 1e-6 * smax,
                    "seed {seed}: σ[{k}] {got} vs {}",
                    fresh.sigma[k]
                );
            }
        }
    }

    #[test]
    fn rank1_update_shape_mismatch() {
        let m = random_matrix(4, 3, 31);
        let s = svd(&m, None).unwrap();
        assert!(rank1_svd_update(&s, &[0.0; 5], &[0.0; 3]).is_err());
    }

    #[test]
    fn colspace_basis_rank_revealing() {
        // Two independent columns plus an exact copy.
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let b = colspace_basis(&a);
        assert_eq!(b.cols(), 2);
        assert_orthonormal_cols(&b, 1e-12);
    }

    #[test]
    fn colspace_basis_of_zero_is_empty() {
        let a = DenseMatrix::<f64>::zeros(4, 3);
        assert_eq!(colspace_basis(&a).cols(), 0);
    }

    #[test]
    fn sym_eigen_matches_diagonal() {
        let a = DenseMatrix::diag(&[1.0, 5.0, 3.0]);
        let (vals, vecs) = sym_eigen(&a);
        assert_close(vals[0], 5.0, 1e-12);
        assert_close(vals[1], 3.0, 1e-12);
        assert_close(vals[2], 1.0, 1e-12);
        assert_orthonormal_cols(&vecs, 1e-12);
    }

    #[test]
    fn sym_eigen_reconstructs() {
        let g = {
            let a = random_matrix(6, 6, 77);
            a.transpose().matmul(&a)
        };
        let (vals, vecs) = sym_eigen(&g);
        let mut rec = DenseMatrix::zeros(6, 6);
        for k in 0..6 {
            for i in 0..6 {
                for j in 0..6 {
                    rec[(i, j)] += vals[k] * vecs[(i, k)] * vecs[(j, k)];
                }
            }
        }
        assert!(rec.sub(&g).frob_sq().sqrt() < 1e-9 * g.frob_sq().sqrt().max(1.0));
    }

    #[test]
    fn f32_svd_smoke() {
        let a = DenseMatrix::<f32>::diag(&[4.0, 2.0]);
        let s = svd(&a, None).unwrap();
        assert!((s.sigma[0] - 4.0).abs() < 1e-5);
        assert!((s.sigma[1] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        assert!(DenseMatrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_vec(1, 2, vec![1.0]).is_err());
    }
}
