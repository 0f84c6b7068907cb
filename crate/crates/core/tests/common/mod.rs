//! Shared helpers and independent oracles for the integration suites.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sketchlearn::matlin::DenseMatrix;

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            a[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    a
}

pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            a[(i, j)] = rand::Rng::random_range(&mut rng, -1.0..1.0);
        }
    }
    a
}

/// Classical two-sided Jacobi eigensolver for symmetric matrices —
/// an oracle independent of the library's kernels. Returns eigenvalues
/// in non-increasing order.
pub fn jacobi_eigvals_oracle(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
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
        for p in 0..n.saturating_sub(1) {
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
    let mut vals: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    vals
}
