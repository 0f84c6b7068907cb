//! Acceptance gate: one test per shipped criterion, each printing a
//! PASS/FAIL line with its measured margins (visible with
//! `cargo test --test acceptance -- --nocapture`).

mod common;

use common::{gaussian_matrix, uniform_matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sketchlearn::learn::{optimize_values, ProxyKind, TrainSet};
use sketchlearn::lra::{best_rank_k_in_rowspace, solve_small_rank_k};
use sketchlearn::matlin::{self, truncate_rank_k, DenseMatrix};
use sketchlearn::sketch::{stack, AnySketch, CountSketch};
use sketchlearn::verify::run_check;

const SEED: u64 = 20260809;

fn report(id: &str, name: &str, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {id} {name}: {verdict} — {detail}");
}

/// Rank-2 approximation of diag(2, 2, √2, √2): optimum 4; the best
/// approximation inside span(e₁,e₃) or span(e₂,e₄) costs 6; the stacked
/// union recovers 4. All exact to 1e-9.
#[test]
fn a01_remark_oracle() {
    let r2 = 2.0f64.sqrt();
    let a = DenseMatrix::diag(&[2.0, 2.0, r2, r2]);

    let opt = a.sub(&truncate_rank_k(&a, 2).unwrap()).frob_sq();

    // Sketches selecting rows {1,3} and rows {2,4}.
    let s = CountSketch::new(2, vec![0, 0, 1, 0], vec![1.0, 0.0, 1.0, 0.0]).unwrap();
    let t = CountSketch::new(2, vec![0, 0, 0, 1], vec![0.0, 1.0, 0.0, 1.0]).unwrap();
    let s_any: AnySketch<f64> = s.clone().into();
    let t_any: AnySketch<f64> = t.clone().into();
    let union: AnySketch<f64> = stack(&s.into(), &t.into()).unwrap().into();

    let cost_s = best_rank_k_in_rowspace(&a, &s_any.apply_left(&a).unwrap(), 2)
        .unwrap()
        .1;
    let cost_t = best_rank_k_in_rowspace(&a, &t_any.apply_left(&a).unwrap(), 2)
        .unwrap()
        .1;
    let cost_union = best_rank_k_in_rowspace(&a, &union.apply_left(&a).unwrap(), 2)
        .unwrap()
        .1;

    let passed = (opt - 4.0).abs() <= 1e-9
        && (cost_s - 6.0).abs() <= 1e-9
        && (cost_t - 6.0).abs() <= 1e-9
        && (cost_union - 4.0).abs() <= 1e-9;
    report(
        "1",
        "remark-oracle",
        passed,
        &format!("optimum {opt:.12}, span(e1,e3) {cost_s:.12}, span(e2,e4) {cost_t:.12}, union {cost_union:.12}"),
    );
    assert!(passed);
}

/// Subspace-level sketch monotonicity for LRA: 100 seeded (A 32×24,
/// S 6×32, T 4×32) triples, stacked cost ≤ base cost + 1e-9 in 100/100.
#[test]
fn a02_lra_sketch_monotonicity() {
    let r = run_check("monotonicity-lra", Some(100), SEED).unwrap();
    report("2", "lra-sketch-monotonicity", r.passed, &r.detail);
    assert!(r.passed, "{}", r.detail);
}

/// Spiked-covariance separation (n=32, d=4096, k=8, s=6, ℓ=16): greedy
/// isolates the heavy rows, its loss stays ≤ 1.01·(n−s), and 20 random
/// placements average ≥ 1.2× worse — in ≥ 9 of 10 data seeds.
#[test]
fn a03_spiked_greedy_separation() {
    let r = run_check("spiked-separation", Some(10), SEED).unwrap();
    report("3", "spiked-greedy-separation", r.passed, &r.detail);
    assert!(r.passed, "{}", r.detail);
}

/// Zipfian separation (h_n=4 → n=60, d=64, 14 bins): greedy loss below
/// n²/2^{h_k−2} and mean random loss ≥ 1.05× that threshold, in ≥ 9 of
/// 10 seeds.
///
/// The second clause inherits the asymptotic constant of the
/// random-placement bound, which at h_k = 2 overshoots the true mean by
/// ~25%: the greedy/random separation itself is ≈2.3× here (reported in
/// the detail lines), but the absolute threshold is out of reach at this
/// level count, so this criterion is expected to fail until the
/// threshold is recalibrated for few-level instances.
#[test]
fn a04_zipf_greedy_separation() {
    let r = run_check("zipf-separation", Some(10), SEED).unwrap();
    report("4", "zipf-greedy-separation", r.passed, &r.detail);
    assert!(r.passed, "{}", r.detail);
}

/// Four-sketch pipeline end to end: classical sketches at default sizes
/// on a 64×48 Gaussian input, 50 seeds — median cost ≤ 1.5× optimum; and
/// lossless sketches reconstruct rank-≤k inputs to 1e-9.
#[test]
fn a05_sketch_lowrank_end_to_end() {
    let r = run_check("lra-end-to-end", Some(50), SEED).unwrap();
    report("5", "sketch-lowrank-end-to-end", r.passed, &r.detail);
    assert!(r.passed, "{}", r.detail);
}

/// Small constrained solver: on 20 seeded instances the residual beats
/// 10⁴ random rank-k candidates, and exactly representable targets are
/// reproduced to 1e-9.
#[test]
fn a06_small_solver_optimality() {
    let k = 2;
    let mut worst_margin = f64::INFINITY;
    for inst in 0..20u64 {
        let c = uniform_matrix(6, 4, SEED + 10 * inst);
        let d = uniform_matrix(3, 5, SEED + 10 * inst + 1);
        let g = uniform_matrix(6, 5, SEED + 10 * inst + 2);
        let sol = solve_small_rank_k(&c, &d, &g, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10 * inst + 3);
        for _ in 0..10_000 {
            let zl = {
                let data: Vec<f64> = (0..4 * k).map(|_| rng.random_range(-2.0..2.0)).collect();
                DenseMatrix::from_vec(4, k, data).unwrap()
            };
            let zr = {
                let data: Vec<f64> = (0..k * 3).map(|_| rng.random_range(-2.0..2.0)).collect();
                DenseMatrix::from_vec(k, 3, data).unwrap()
            };
            let cand = c.matmul(&zl).matmul(&zr.matmul(&d)).sub(&g).frob_sq();
            worst_margin = worst_margin.min(cand - sol.residual);
            assert!(
                sol.residual <= cand + 1e-9,
                "instance {inst}: solver {} beaten by random candidate {}",
                sol.residual,
                cand
            );
        }

        // Exactly representable target.
        let w = uniform_matrix(4, k, SEED + 900 + inst).matmul(&uniform_matrix(k, 3, SEED + 950 + inst));
        let g_exact = c.matmul(&w).matmul(&d);
        let sol_exact = solve_small_rank_k(&c, &d, &g_exact, k).unwrap();
        assert!(
            sol_exact.residual <= 1e-9,
            "instance {inst}: representable residual {}",
            sol_exact.residual
        );
    }
    report(
        "6",
        "small-solver-optimality",
        true,
        &format!("20 instances × 10⁴ candidates; smallest candidate margin {worst_margin:.3e}; representable residual ≤ 1e-9"),
    );
}

/// ApproxCheck selection with a corrupted learned sketch: classical
/// chosen ≥ 90/100 for LRA (sketched estimates at m' = 64) and 100/100
/// for k-means (exact costs).
#[test]
fn a07_approxcheck_selection() {
    let lra = run_check("approxcheck-lra", Some(100), SEED).unwrap();
    let km = run_check("approxcheck-kmeans", Some(100), SEED).unwrap();
    let passed = lra.passed && km.passed;
    report(
        "7",
        "approxcheck-selection",
        passed,
        &format!("lra: {}; kmeans: {}", lra.detail, km.detail),
    );
    assert!(passed, "lra: {} / kmeans: {}", lra.detail, km.detail);
}

/// Learning-order pattern on spiked training sets (8 train / 2 test,
/// 10 seeds): mean held-out proxy loss ours ≤ ivy19 ≤ classical, with
/// ours at least 20% ahead of classical.
#[test]
fn a08_learning_order() {
    let r = run_check("learning-order", Some(10), SEED).unwrap();
    report("8", "learning-order", r.passed, &r.detail);
    assert!(r.passed, "{}", r.detail);
}

/// Frobenius estimation with a 4-bin CountSketch on a fixed 64×32
/// matrix: ‖SA‖² within (1±0.5)·‖A‖² in ≥ 2/3 of 200 seeds.
#[test]
fn a09_frobenius_estimation() {
    let r = run_check("frobenius-estimate", Some(200), SEED).unwrap();
    report("9", "frobenius-estimation", r.passed, &r.detail);
    assert!(r.passed, "{}", r.detail);
}

/// Numerical hygiene: factorization oracles at stated tolerances and
/// non-increasing value-optimization traces on 50 seeded runs. The value
/// gradient is computed by central finite differences, so the descent
/// trace property stands in for an analytic-gradient check.
#[test]
fn a10_numerical_hygiene() {
    // SVD spectrum against an independent symmetric-eigensolver oracle.
    for inst in 0..5u64 {
        let a = uniform_matrix(7, 5, SEED + inst);
        let gram = a.transpose().matmul(&a);
        let gram_rows: Vec<Vec<f64>> = (0..5).map(|i| gram.row(i).to_vec()).collect();
        let eigs = common::jacobi_eigvals_oracle(gram_rows);
        let s = matlin::svd(&a, None).unwrap();
        for (sig, eig) in s.sigma.iter().zip(&eigs) {
            assert!(
                (sig - eig.max(0.0).sqrt()).abs() < 1e-8,
                "spectrum mismatch: {sig} vs {}",
                eig.max(0.0).sqrt()
            );
        }
        // Reconstruction and orthonormality.
        let rec = s.reconstruct();
        assert!(rec.sub(&a).frob_sq().sqrt() <= 1e-8 * a.frob_sq().sqrt());
        let utu = s.u.transpose().matmul(&s.u);
        let vtv = s.v.transpose().matmul(&s.v);
        let eye = DenseMatrix::identity(5);
        assert!(utu.sub(&eye).max_abs() < 1e-9);
        assert!(vtv.sub(&eye).max_abs() < 1e-9);

        // QR reconstruction.
        let (q, r) = matlin::qr(&a).unwrap();
        assert!(q.matmul(&r).sub(&a).frob_sq().sqrt() < 1e-9);
        assert!(q.transpose().matmul(&q).sub(&eye).max_abs() < 1e-9);

        // Penrose conditions.
        let p = matlin::pseudo_inverse(&a).unwrap();
        assert!(a.matmul(&p).matmul(&a).sub(&a).frob_sq().sqrt() < 1e-8);
        assert!(p.matmul(&a).matmul(&p).sub(&p).frob_sq().sqrt() < 1e-8);
        let ap = a.matmul(&p);
        let pa = p.matmul(&a);
        assert!(ap.sub(&ap.transpose()).frob_sq().sqrt() < 1e-8);
        assert!(pa.sub(&pa.transpose()).frob_sq().sqrt() < 1e-8);
    }

    // 50 seeded value-optimization traces are non-increasing.
    for run in 0..50u64 {
        let tr = TrainSet::new(vec![
            gaussian_matrix(10, 14, SEED + 100 + run),
            gaussian_matrix(10, 14, SEED + 200 + run),
        ])
        .unwrap();
        let s = CountSketch::<f64>::random(4, 10, SEED + 300 + run).unwrap();
        let (_, trace) = optimize_values(
            &tr,
            s.positions(),
            s.values(),
            3,
            ProxyKind::Rowspace,
            30,
            0.1,
        )
        .unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "run {run}: trace increased {w:?}");
        }
    }

    report(
        "10",
        "numerical-hygiene",
        true,
        "SVD/QR/pseudo-inverse oracles at tolerance; 50/50 descent traces non-increasing; gradient = central differences (descent-trace property applies)",
    );
}
