//! CountSketch representation, sparse application kernels and stacking.
//!
//! A CountSketch `S ∈ R^{m×n}` has exactly one stored entry per column:
//! column `i` holds value `v[i]` in row `p[i]`. Applying it never
//! materializes the dense matrix. Stacking keeps the parts separate so
//! extension/monotonicity arguments operate on exact row spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matlin::DenseMatrix;
use crate::{Error, Result, Scalar};

// ── CountSketch ─────────────────────────────────────────────────────

/// Sparse sketch with one nonzero per column, stored as positions `p`
/// (0-based bins; files use 1-based) and values `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSketch<F> {
    m: usize,
    p: Vec<usize>,
    v: Vec<F>,
}

impl<F: Scalar> CountSketch<F> {
    pub fn new(m: usize, p: Vec<usize>, v: Vec<F>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("sketch with zero bins".into()));
        }
        if p.len() != v.len() {
            return Err(Error::InvalidInput(format!(
                "position/value length mismatch: {} vs {}",
                p.len(),
                v.len()
            )));
        }
        if p.is_empty() {
            return Err(Error::InvalidInput("sketch with zero columns".into()));
        }
        if let Some(&bad) = p.iter().find(|&&b| b >= m) {
            return Err(Error::InvalidInput(format!(
                "bin index {bad} out of range for {m} bins"
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sketch value".into()));
        }
        Ok(CountSketch { m, p, v })
    }

    /// Classical random CountSketch: uniform bins, Rademacher values.
    pub fn random(m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput("random sketch needs m ≥ 1, n ≥ 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            p.push(rng.random_range(0..m));
            v.push(if rng.random::<bool>() { F::one() } else { -F::one() });
        }
        Ok(CountSketch { m, p, v })
    }

    /// The first-`n`-coordinates selector: `p[i] = i`, `v[i] = 1` (lossless
    /// when `m = n`).
    pub fn identity_permutation(m: usize, n: usize) -> Result<Self> {
        if n > m {
            return Err(Error::InvalidInput(format!(
                "identity permutation needs m ≥ n, got {m} < {n}"
            )));
        }
        Ok(CountSketch {
            m,
            p: (0..n).collect(),
            v: vec![F::one(); n],
        })
    }

    #[inline]
    pub fn bins(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn positions(&self) -> &[usize] {
        &self.p
    }

    pub fn values(&self) -> &[F] {
        &self.v
    }

    /// All values in `{+1, −1}`?
    pub fn is_classical(&self) -> bool {
        self.v.iter().all(|&x| x == F::one() || x == -F::one())
    }

    /// Copy with column `col` rehashed to `bin` with value `val`.
    pub fn with_entry(&self, col: usize, bin: usize, val: F) -> Result<Self> {
        if col >= self.n() {
            return Err(Error::InvalidInput(format!(
                "column {col} out of range for {} columns",
                self.n()
            )));
        }
        if bin >= self.m {
            return Err(Error::InvalidInput(format!(
                "bin {bin} out of range for {} bins",
                self.m
            )));
        }
        if !val.is_finite() {
            return Err(Error::NonFinite("sketch value".into()));
        }
        let mut out = self.clone();
        out.p[col] = bin;
        out.v[col] = val;
        Ok(out)
    }

    /// Copy with all values replaced (positions kept).
    pub fn with_values(&self, v: Vec<F>) -> Result<Self> {
        Self::new(self.m, self.p.clone(), v)
    }
}

// ── StackedSketch ───────────────────────────────────────────────────

/// Vertical concatenation of CountSketches over the same input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedSketch<F> {
    parts: Vec<CountSketch<F>>,
}

impl<F: Scalar> StackedSketch<F> {
    pub fn new(parts: Vec<CountSketch<F>>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidInput("stacked sketch with no parts".into()));
        };
        let n = first.n();
        if parts.iter().any(|s| s.n() != n) {
            return Err(Error::InvalidInput(
                "stacked sketch parts have differing column counts".into(),
            ));
        }
        Ok(StackedSketch { parts })
    }

    pub fn parts(&self) -> &[CountSketch<F>] {
        &self.parts
    }

    pub fn effective_rows(&self) -> usize {
        self.parts.iter().map(|s| s.bins()).sum()
    }

    pub fn n(&self) -> usize {
        self.parts[0].n()
    }
}

/// Stack `top` above `bottom`. The output row space of `stack·A` contains
/// the row space of `top·A` for every conforming `A`.
pub fn stack<F: Scalar>(top: &AnySketch<F>, bottom: &AnySketch<F>) -> Result<StackedSketch<F>> {
    if top.input_dim() != bottom.input_dim() {
        return Err(Error::InvalidInput(format!(
            "stack column mismatch: {} vs {}",
            top.input_dim(),
            bottom.input_dim()
        )));
    }
    let mut parts = Vec::new();
    for side in [top, bottom] {
        match side {
            AnySketch::Count(c) => parts.push(c.clone()),
            AnySketch::Stacked(s) => parts.extend(s.parts.iter().cloned()),
            AnySketch::Dense(_) => {
                return Err(Error::InvalidInput(
                    "dense sketches cannot be stacked".into(),
                ))
            }
        }
    }
    StackedSketch::new(parts)
}

// ── Polymorphic application ─────────────────────────────────────────

/// A sketch in any of the three shapes the pipelines accept.
#[derive(Debug, Clone)]
pub enum AnySketch<F> {
    Count(CountSketch<F>),
    Stacked(StackedSketch<F>),
    /// Dense compression matrix (the exact-SVD baseline).
    Dense(DenseMatrix<F>),
}

impl<F: Scalar> From<CountSketch<F>> for AnySketch<F> {
    fn from(c: CountSketch<F>) -> Self {
        AnySketch::Count(c)
    }
}

impl<F: Scalar> From<StackedSketch<F>> for AnySketch<F> {
    fn from(s: StackedSketch<F>) -> Self {
        AnySketch::Stacked(s)
    }
}

impl<F: Scalar> From<DenseMatrix<F>> for AnySketch<F> {
    fn from(d: DenseMatrix<F>) -> Self {
        AnySketch::Dense(d)
    }
}

impl<F: Scalar> AnySketch<F> {
    /// Output dimension (total bin count).
    pub fn rows(&self) -> usize {
        match self {
            AnySketch::Count(c) => c.bins(),
            AnySketch::Stacked(s) => s.effective_rows(),
            AnySketch::Dense(d) => d.rows(),
        }
    }

    /// Input dimension `n` (the sketch is `rows × input_dim`).
    pub fn input_dim(&self) -> usize {
        match self {
            AnySketch::Count(c) => c.n(),
            AnySketch::Stacked(s) => s.n(),
            AnySketch::Dense(d) => d.cols(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<F> {
        match self {
            AnySketch::Count(c) => to_dense(c),
            AnySketch::Stacked(s) => {
                let mut out = DenseMatrix::zeros(s.effective_rows(), s.n());
                let mut offset = 0;
                for part in &s.parts {
                    for (i, (&bin, &val)) in part.p.iter().zip(&part.v).enumerate() {
                        out[(offset + bin, i)] = val;
                    }
                    offset += part.bins();
                }
                out
            }
            AnySketch::Dense(d) => d.clone(),
        }
    }

    /// `S · A` in one pass over the entries of `A`.
    pub fn apply_left(&self, a: &DenseMatrix<F>) -> Result<DenseMatrix<F>> {
        if self.input_dim() != a.rows() {
            return Err(Error::InvalidInput(format!(
                "apply_left: sketch over {} inputs applied to {} rows",
                self.input_dim(),
                a.rows()
            )));
        }
        match self {
            AnySketch::Count(c) => {
                let mut out = DenseMatrix::zeros(c.bins(), a.cols());
                for (i, (&bin, &val)) in c.p.iter().zip(&c.v).enumerate() {
                    if val == F::zero() {
                        continue;
                    }
                    let src = a.row(i);
                    let dst = out.row_mut(bin);
                    for (o, &x) in dst.iter_mut().zip(src) {
                        *o += val * x;
                    }
                }
                Ok(out)
            }
            AnySketch::Stacked(s) => {
                let mut out = DenseMatrix::zeros(s.effective_rows(), a.cols());
                let mut offset = 0;
                for part in &s.parts {
                    for (i, (&bin, &val)) in part.p.iter().zip(&part.v).enumerate() {
                        if val == F::zero() {
                            continue;
                        }
                        let src = a.row(i);
                        let dst = out.row_mut(offset + bin);
                        for (o, &x) in dst.iter_mut().zip(src) {
                            *o += val * x;
                        }
                    }
                    offset += part.bins();
                }
                Ok(out)
            }
            AnySketch::Dense(d) => Ok(d.matmul(a)),
        }
    }

    /// `A · Sᵀ`, the right-sketching product; equals
    /// `apply_left(S, Aᵀ)ᵀ` without forming the transposes.
    pub fn apply_right(&self, a: &DenseMatrix<F>) -> Result<DenseMatrix<F>> {
        if self.input_dim() != a.cols() {
            return Err(Error::InvalidInput(format!(
                "apply_right: sketch over {} inputs applied to {} columns",
                self.input_dim(),
                a.cols()
            )));
        }
        match self {
            AnySketch::Count(c) => {
                let mut out = DenseMatrix::zeros(a.rows(), c.bins());
                for r in 0..a.rows() {
                    let src = a.row(r);
                    let dst = out.row_mut(r);
                    for (i, (&bin, &val)) in c.p.iter().zip(&c.v).enumerate() {
                        if val == F::zero() {
                            continue;
                        }
                        dst[bin] += val * src[i];
                    }
                }
                Ok(out)
            }
            AnySketch::Stacked(s) => {
                let mut out = DenseMatrix::zeros(a.rows(), s.effective_rows());
                let mut offset = 0;
                for part in &s.parts {
                    for r in 0..a.rows() {
                        let src = a.row(r);
                        let dst = out.row_mut(r);
                        for (i, (&bin, &val)) in part.p.iter().zip(&part.v).enumerate() {
                            if val == F::zero() {
                                continue;
                            }
                            dst[offset + bin] += val * src[i];
                        }
                    }
                    offset += part.bins();
                }
                Ok(out)
            }
            AnySketch::Dense(d) => Ok(a.matmul(&d.transpose())),
        }
    }
}

/// Dense `m × n` form of a CountSketch.
pub fn to_dense<F: Scalar>(s: &CountSketch<F>) -> DenseMatrix<F> {
    let mut out = DenseMatrix::zeros(s.m, s.n());
    for (i, (&bin, &val)) in s.p.iter().zip(&s.v).enumerate() {
        out[(bin, i)] = val;
    }
    out
}
