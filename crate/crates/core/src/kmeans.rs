//! k-means: the objective, k-means++ seeded Lloyd iteration, the sketched
//! variant (cluster in the row space of `S·A`, re-express on `A`), and
//! the exact-cost ApproxCheck.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lra::Chosen;
use crate::matlin::{self, DenseMatrix};
use crate::sketch::AnySketch;
use crate::{Error, Result, Scalar};

/// A clustering of the rows of some matrix: per-row cluster index,
/// cluster centers (one row each) and the summed squared distance.
#[derive(Debug, Clone)]
pub struct Clustering<F> {
    pub assignments: Vec<usize>,
    pub centers: DenseMatrix<F>,
    pub cost: F,
}

/// Lloyd iteration cap used by the seeded entry points.
pub const DEFAULT_MAX_ITERS: usize = 100;

fn centers_of<F: Scalar>(a: &DenseMatrix<F>, assignments: &[usize], k: usize) -> DenseMatrix<F> {
    let d = a.cols();
    let mut centers = DenseMatrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (i, &c) in assignments.iter().enumerate() {
        counts[c] += 1;
        let row = a.row(i);
        let dst = centers.row_mut(c);
        for (o, &x) in dst.iter_mut().zip(row) {
            *o += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = F::one() / F::from(counts[c]).unwrap();
            for x in centers.row_mut(c) {
                *x *= inv;
            }
        }
    }
    centers
}

fn dist_sq<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Sum of squared distances of each row to the *mean* of its assigned
/// cluster (empty clusters contribute nothing).
pub fn kmeans_cost<F: Scalar>(a: &DenseMatrix<F>, assignments: &[usize], k: usize) -> Result<F> {
    if assignments.len() != a.rows() {
        return Err(Error::InvalidInput(format!(
            "{} assignments for {} rows",
            assignments.len(),
            a.rows()
        )));
    }
    if let Some(&bad) = assignments.iter().find(|&&c| c >= k) {
        return Err(Error::InvalidInput(format!(
            "cluster index {bad} out of range for k = {k}"
        )));
    }
    let centers = centers_of(a, assignments, k);
    let mut total = F::zero();
    for (i, &c) in assignments.iter().enumerate() {
        total += dist_sq(a.row(i), centers.row(c));
    }
    Ok(total)
}

/// k-means++ seeding followed by Lloyd iterations until the assignment
/// reaches a fixpoint or `max_iters` passes. Deterministic per seed; the
/// per-iteration cost trace is non-increasing.
pub fn lloyd_kmeanspp<F: Scalar>(
    a: &DenseMatrix<F>,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<Clustering<F>> {
    lloyd_kmeanspp_traced(a, k, seed, max_iters).map(|(c, _)| c)
}

/// Like [`lloyd_kmeanspp`] but also returns the cost after each Lloyd
/// iteration.
pub fn lloyd_kmeanspp_traced<F: Scalar>(
    a: &DenseMatrix<F>,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<(Clustering<F>, Vec<F>)> {
    let n = a.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("need 1 ≤ k ≤ {n}, got k = {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding.
    let mut center_rows: Vec<usize> = Vec::with_capacity(k);
    center_rows.push(rng.random_range(0..n));
    let mut d2: Vec<F> = (0..n)
        .map(|i| dist_sq(a.row(i), a.row(center_rows[0])))
        .collect();
    while center_rows.len() < k {
        let total: F = d2.iter().copied().sum();
        let next = if total > F::zero() {
            let mut target = F::from(rng.random::<f64>()).unwrap() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // All remaining mass at zero distance: fall back to uniform.
            rng.random_range(0..n)
        };
        center_rows.push(next);
        for i in 0..n {
            let d = dist_sq(a.row(i), a.row(next));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    let mut centers = DenseMatrix::zeros(k, a.cols());
    for (c, &row) in center_rows.iter().enumerate() {
        centers.row_mut(c).copy_from_slice(a.row(row));
    }

    // Lloyd.
    let mut assignments = vec![0usize; n];
    let mut trace = Vec::new();
    for _iter in 0..max_iters {
        let mut changed = false;
        for i in 0..n {
            let row = a.row(i);
            let mut best = 0usize;
            let mut best_d = dist_sq(row, centers.row(0));
            for c in 1..k {
                let d = dist_sq(row, centers.row(c));
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }

        // Repair empty clusters with the point farthest from its center.
        let mut counts = vec![0usize; k];
        for &c in &assignments {
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far = 0usize;
            let mut far_d = -F::one();
            for i in 0..n {
                if counts[assignments[i]] <= 1 {
                    continue; // moving a singleton would empty its cluster
                }
                let d = dist_sq(a.row(i), centers.row(assignments[i]));
                if d > far_d {
                    far_d = d;
                    far = i;
                }
            }
            counts[assignments[far]] -= 1;
            assignments[far] = c;
            counts[c] = 1;
            changed = true;
        }

        centers = centers_of(a, &assignments, k);
        trace.push(kmeans_cost(a, &assignments, k)?);
        if !changed {
            break;
        }
    }

    let cost = *trace.last().expect("at least one Lloyd iteration");
    Ok((
        Clustering {
            assignments,
            centers,
            cost,
        },
        trace,
    ))
}

/// Sketched k-means: project `A` onto the row space of `S·A` (via the
/// right singular vectors of the sketch), cluster the projection, then
/// re-express the clustering on the original rows — assignments are kept,
/// centers become per-cluster means of `A`'s rows, and the cost is the
/// exact k-means cost on `A`.
pub fn sketch_kmeans<F: Scalar>(
    a: &DenseMatrix<F>,
    s: &AnySketch<F>,
    k: usize,
    seed: u64,
) -> Result<Clustering<F>> {
    let sa = s.apply_left(a)?;
    let basis = matlin::rowspace_basis(&sa); // d × r
    let projected = if basis.cols() == 0 {
        // Degenerate sketch: all points project to the origin.
        DenseMatrix::zeros(a.rows(), 1)
    } else {
        a.matmul(&basis)
    };
    let low = lloyd_kmeanspp(&projected, k, seed, DEFAULT_MAX_ITERS)?;
    let centers = centers_of(a, &low.assignments, k);
    let cost = kmeans_cost(a, &low.assignments, k)?;
    Ok(Clustering {
        assignments: low.assignments,
        centers,
        cost,
    })
}

/// Run [`sketch_kmeans`] with both sketches (same seed), compare exact
/// costs on `A`, and keep the cheaper clustering; ties go to the learned
/// sketch.
pub fn approx_check_kmeans<F: Scalar>(
    a: &DenseMatrix<F>,
    s_learned: &AnySketch<F>,
    s_classical: &AnySketch<F>,
    k: usize,
    seed: u64,
) -> Result<(Clustering<F>, Chosen)> {
    let learned = sketch_kmeans(a, s_learned, k, seed)?;
    let classical = sketch_kmeans(a, s_classical, k, seed)?;
    if learned.cost <= classical.cost {
        Ok((learned, Chosen::Learned))
    } else {
        Ok((classical, Chosen::Classical))
    }
}
