//! Seeded generators for the synthetic matrix families the theory
//! analyzes, plus Gaussian cluster data for the k-means tests. Every
//! generator is a pure function of its parameters: same seed, same bytes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matlin::DenseMatrix;
use crate::{cast, Error, Result, Scalar};

/// Spiked rows: `s` fixed "heavy" rows of norm `ell > 1`, the rest random
/// unit vectors. The heavy indices are part of the distribution — they do
/// not vary with the draw seed.
#[derive(Debug, Clone)]
pub struct SpikedParams {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub ell: f64,
    /// Heavy row indices; defaults to `0..s`.
    pub heavy_indices: Option<Vec<usize>>,
    pub seed: u64,
}

impl SpikedParams {
    pub fn heavy(&self) -> Vec<usize> {
        self.heavy_indices
            .clone()
            .unwrap_or_else(|| (0..self.s).collect())
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidInput("spiked dims must be positive".into()));
        }
        if self.s >= self.n {
            return Err(Error::InvalidInput(format!(
                "heavy count {} must be below n = {}",
                self.s, self.n
            )));
        }
        if self.ell <= 1.0 {
            return Err(Error::InvalidInput("heavy norm must exceed 1".into()));
        }
        let heavy = self.heavy();
        if heavy.len() != self.s {
            return Err(Error::InvalidInput("heavy index count != s".into()));
        }
        let mut seen = vec![false; self.n];
        for &i in &heavy {
            if i >= self.n || seen[i] {
                return Err(Error::InvalidInput("heavy indices distinct in [0,n)".into()));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Zipfian on squared row norms: mutually orthogonal rows, with level `i`
/// (for `i = 1..=h_n`) holding `2^{i+1}` rows of squared norm `n²/2^{2i}`.
/// The level structure fixes `n = 2^{h_n+2} − 4`.
#[derive(Debug, Clone)]
pub struct ZipfParams {
    pub h_n: u32,
    pub d: usize,
    pub seed: u64,
}

impl ZipfParams {
    pub fn n(&self) -> usize {
        (1usize << (self.h_n + 2)) - 4
    }

    fn validate(&self) -> Result<()> {
        if self.h_n == 0 {
            return Err(Error::InvalidInput("need at least one level".into()));
        }
        if self.d < self.n() {
            return Err(Error::InvalidInput(format!(
                "orthogonality needs d ≥ n: {} < {}",
                self.d,
                self.n()
            )));
        }
        Ok(())
    }
}

fn gaussian_row<F: Scalar>(rng: &mut ChaCha8Rng, d: usize) -> Vec<F> {
    (0..d)
        .map(|_| cast::<F>(StandardNormal.sample(rng)))
        .collect()
}

fn normalize<F: Scalar>(row: &mut [F]) {
    let norm: F = row.iter().map(|&x| x * x).sum::<F>().sqrt();
    if norm > F::zero() {
        for x in row.iter_mut() {
            *x /= norm;
        }
    }
}

/// Draw one spiked-covariance matrix.
pub fn gen_spiked<F: Scalar>(params: &SpikedParams) -> Result<DenseMatrix<F>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let heavy = params.heavy();
    let mut is_heavy = vec![false; params.n];
    for &i in &heavy {
        is_heavy[i] = true;
    }
    let ell = cast::<F>(params.ell);
    let mut out = DenseMatrix::zeros(params.n, params.d);
    for i in 0..params.n {
        let mut row = gaussian_row::<F>(&mut rng, params.d);
        normalize(&mut row);
        if is_heavy[i] {
            for x in row.iter_mut() {
                *x *= ell;
            }
        }
        out.row_mut(i).copy_from_slice(&row);
    }
    Ok(out)
}

/// Draw one Zipfian matrix: orthonormalized Gaussian rows scaled per level.
pub fn gen_zipf<F: Scalar>(params: &ZipfParams) -> Result<DenseMatrix<F>> {
    params.validate()?;
    let n = params.n();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rows: Vec<Vec<F>> = (0..n).map(|_| gaussian_row::<F>(&mut rng, params.d)).collect();

    // Modified Gram-Schmidt with one reorthogonalization pass; Gaussian
    // rows in d ≥ n dimensions are independent with probability 1.
    for i in 0..n {
        for _pass in 0..2 {
            for j in 0..i {
                let dot: F = rows[i].iter().zip(&rows[j]).map(|(&x, &y)| x * y).sum();
                let (head, tail) = rows.split_at_mut(i);
                for (x, &y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= dot * y;
                }
            }
        }
        normalize(&mut rows[i]);
    }

    let nf = cast::<F>(n as f64);
    let mut out = DenseMatrix::zeros(n, params.d);
    let mut row_idx = 0;
    for level in 1..=params.h_n {
        let count = 1usize << (level + 1);
        let norm = nf / cast::<F>((1u64 << level) as f64);
        for _ in 0..count {
            for (o, &x) in out.row_mut(row_idx).iter_mut().zip(&rows[row_idx]) {
                *o = x * norm;
            }
            row_idx += 1;
        }
    }
    debug_assert_eq!(row_idx, n);
    Ok(out)
}

/// Planted Gaussian clusters: `k` centers at pairwise distance at least
/// `separation`, unit-variance points split evenly, with ground-truth
/// labels.
pub fn gen_gaussian_clusters<F: Scalar>(
    n: usize,
    d: usize,
    k: usize,
    separation: f64,
    seed: u64,
) -> Result<(DenseMatrix<F>, Vec<usize>)> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput("cluster dims must be positive".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("need 1 ≤ k ≤ n, got k = {k}")));
    }
    if k > d {
        return Err(Error::InvalidInput(format!(
            "center placement needs k ≤ d, got {k} > {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Orthonormal random directions scaled by the separation put every
    // center pair at distance separation·√2.
    let mut dirs: Vec<Vec<F>> = (0..k).map(|_| gaussian_row::<F>(&mut rng, d)).collect();
    for i in 0..k {
        for _pass in 0..2 {
            for j in 0..i {
                let dot: F = dirs[i].iter().zip(&dirs[j]).map(|(&x, &y)| x * y).sum();
                let (head, tail) = dirs.split_at_mut(i);
                for (x, &y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= dot * y;
                }
            }
        }
        normalize(&mut dirs[i]);
    }
    let sep = cast::<F>(separation);

    let mut out = DenseMatrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    let base = n / k;
    let extra = n % k;
    let mut row = 0;
    for c in 0..k {
        let count = base + usize::from(c < extra);
        for _ in 0..count {
            let noise = gaussian_row::<F>(&mut rng, d);
            for (j, o) in out.row_mut(row).iter_mut().enumerate() {
                *o = dirs[c][j] * sep + noise[j];
            }
            labels.push(c);
            row += 1;
        }
    }
    Ok((out, labels))
}
