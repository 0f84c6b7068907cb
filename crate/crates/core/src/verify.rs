//! Named verification suites: statistical and exact properties of the
//! sketching pipelines, runnable from the CLI (`verify`) and asserted by
//! the acceptance tests. Every check is deterministic given its seed;
//! trials fan out in parallel and are reduced in trial order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::gen::{gen_gaussian_clusters, gen_spiked, gen_zipf, SpikedParams, ZipfParams};
use crate::kmeans::{approx_check_kmeans, sketch_kmeans};
use crate::learn::{
    greedy_positions, ivy19_baseline, mean_proxy_loss, train_pipeline, GreedyConfig, ProxyKind,
    TrainSet,
};
use crate::lra::{
    approx_check_lra, best_rank_k_in_rowspace, lra_cost, sketch_lowrank, Chosen, LraSketchSet,
};
use crate::matlin::{truncate_rank_k, DenseMatrix};
use crate::sketch::{stack, AnySketch, CountSketch};
use crate::{Error, Result};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Measured margins, one line per quantity.
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }
}

pub const CHECK_NAMES: &[&str] = &[
    "monotonicity-lra",
    "monotonicity-kmeans",
    "spiked-separation",
    "zipf-separation",
    "frobenius-estimate",
    "approxcheck-lra",
    "approxcheck-kmeans",
    "lra-end-to-end",
    "learning-order",
];

/// Run one check by name. `trials` overrides the check's default trial
/// count where it has one.
pub fn run_check(name: &str, trials: Option<usize>, seed: u64) -> Result<CheckResult> {
    match name {
        "monotonicity-lra" => Ok(check_monotonicity_lra(trials.unwrap_or(100), seed)),
        "monotonicity-kmeans" => Ok(check_monotonicity_kmeans(trials.unwrap_or(100), seed)),
        "spiked-separation" => Ok(check_spiked_separation(trials.unwrap_or(10), seed)),
        "zipf-separation" => Ok(check_zipf_separation(trials.unwrap_or(10), seed)),
        "frobenius-estimate" => Ok(check_frobenius_estimate(trials.unwrap_or(200), seed)),
        "approxcheck-lra" => Ok(check_approxcheck_lra(trials.unwrap_or(100), seed)),
        "approxcheck-kmeans" => Ok(check_approxcheck_kmeans(trials.unwrap_or(100), seed)),
        "lra-end-to-end" => Ok(check_lra_end_to_end(trials.unwrap_or(50), seed)),
        "learning-order" => Ok(check_learning_order(trials.unwrap_or(10), seed)),
        other => Err(Error::InvalidInput(format!(
            "unknown check '{other}'; known: {}",
            CHECK_NAMES.join(", ")
        ))),
    }
}

pub fn run_all(seed: u64) -> Vec<CheckResult> {
    CHECK_NAMES
        .iter()
        .map(|name| run_check(name, None, seed).expect("known name"))
        .collect()
}

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            a[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    a
}

// ── Monotonicity ────────────────────────────────────────────────────

/// Appending sketch rows never worsens the subspace-restricted cost —
/// exact (to 1e-9) on both the row side and the column side.
fn check_monotonicity_lra(trials: usize, seed: u64) -> CheckResult {
    let k = 4;
    let ok: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let base = seed.wrapping_add(t as u64 * 10);
            let a = gaussian_matrix(32, 24, base);
            let s = CountSketch::<f64>::random(6, 32, base + 1).unwrap();
            let t_ext = CountSketch::<f64>::random(4, 32, base + 2).unwrap();
            let stacked = stack(&s.clone().into(), &t_ext.into()).unwrap();
            let sa = AnySketch::from(s).apply_left(&a).unwrap();
            let sta = AnySketch::from(stacked).apply_left(&a).unwrap();
            let (_, base_cost) = best_rank_k_in_rowspace(&a, &sa, k).unwrap();
            let (_, ext_cost) = best_rank_k_in_rowspace(&a, &sta, k).unwrap();
            let row_ok = ext_cost <= base_cost + 1e-9;

            let r = CountSketch::<f64>::random(5, 24, base + 3).unwrap();
            let t_r = CountSketch::<f64>::random(3, 24, base + 4).unwrap();
            let stacked_r = stack(&r.clone().into(), &t_r.into()).unwrap();
            let art = AnySketch::from(r).apply_right(&a).unwrap();
            let art_ext = AnySketch::from(stacked_r).apply_right(&a).unwrap();
            let (_, c_base) = crate::lra::best_rank_k_in_colspace(&a, &art, k).unwrap();
            let (_, c_ext) = crate::lra::best_rank_k_in_colspace(&a, &art_ext, k).unwrap();
            usize::from(row_ok && c_ext <= c_base + 1e-9)
        })
        .sum();
    CheckResult::new(
        "monotonicity-lra",
        ok == trials,
        format!("{ok}/{trials} trials satisfied cost(stack) ≤ cost(base) + 1e-9 on both sides"),
    )
}

/// Sketched k-means with an extended sketch: mean cost over seeded trials
/// within 1.05× of the unextended mean (the solver is randomized, so the
/// guarantee is in expectation, not per instance).
fn check_monotonicity_kmeans(trials: usize, seed: u64) -> CheckResult {
    // k = 2 keeps Lloyd's local-optimum noise out of the comparison:
    // a bad second seed always migrates, so the mean reflects the
    // projections rather than rare seeding accidents.
    let k = 2;
    let costs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let base = seed.wrapping_add(t as u64 * 10);
            let (a, _) = gen_gaussian_clusters::<f64>(60, 16, k, 6.0, base).unwrap();
            let s = CountSketch::<f64>::random(5, 60, base + 1).unwrap();
            let t_ext = CountSketch::<f64>::random(3, 60, base + 2).unwrap();
            let stacked = stack(&s.clone().into(), &t_ext.into()).unwrap();
            let c_base = sketch_kmeans(&a, &s.into(), k, base + 3).unwrap().cost;
            let c_ext = sketch_kmeans(&a, &stacked.into(), k, base + 3).unwrap().cost;
            (c_base, c_ext)
        })
        .collect();
    let mean_base: f64 = costs.iter().map(|c| c.0).sum::<f64>() / trials as f64;
    let mean_ext: f64 = costs.iter().map(|c| c.1).sum::<f64>() / trials as f64;
    CheckResult::new(
        "monotonicity-kmeans",
        mean_ext <= 1.05 * mean_base,
        format!(
            "mean cost extended {mean_ext:.4} vs base {mean_base:.4} (ratio {:.4}, limit 1.05)",
            mean_ext / mean_base
        ),
    )
}

// ── Greedy separations ──────────────────────────────────────────────

struct SpikedSeparationTrial {
    isolated: bool,
    greedy_loss: f64,
    random_mean: f64,
}

fn spiked_separation_trial(data_seed: u64) -> SpikedSeparationTrial {
    let (n, d, s_count, ell, m, k) = (32usize, 4096usize, 6usize, 16.0, 8usize, 8usize);
    let members: Vec<DenseMatrix<f64>> = (0..4)
        .map(|i| {
            gen_spiked(&SpikedParams {
                n,
                d,
                s: s_count,
                ell,
                heavy_indices: None,
                seed: data_seed.wrapping_add(i),
            })
            .unwrap()
        })
        .collect();
    let tr = TrainSet::new(members).unwrap();
    let sketch = greedy_positions(&tr, &GreedyConfig::new(m, k)).unwrap();

    let heavy_bins: Vec<usize> = (0..s_count).map(|i| sketch.positions()[i]).collect();
    let mut distinct = heavy_bins.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let isolated = distinct.len() == s_count
        && (s_count..n).all(|i| !heavy_bins.contains(&sketch.positions()[i]));

    let greedy_loss = mean_proxy_loss(&tr, &sketch, k, ProxyKind::Rowspace).unwrap();
    let random_mean = (0..20)
        .map(|t| {
            let r = CountSketch::<f64>::random(m, n, data_seed.wrapping_add(1000 + t)).unwrap();
            mean_proxy_loss(&tr, &r, k, ProxyKind::Rowspace).unwrap()
        })
        .sum::<f64>()
        / 20.0;
    SpikedSeparationTrial {
        isolated,
        greedy_loss,
        random_mean,
    }
}

/// Greedy placement on spiked data isolates the heavy rows, holds the
/// light-row loss bound, and beats random placement by ≥ 1.2× —
/// in at least 9 of 10 data seeds.
fn check_spiked_separation(data_seeds: usize, seed: u64) -> CheckResult {
    let bound = 1.01 * (32.0 - 6.0);
    let trials: Vec<SpikedSeparationTrial> = (0..data_seeds)
        .into_par_iter()
        .map(|t| spiked_separation_trial(seed.wrapping_add(t as u64 * 100)))
        .collect();
    let mut ok = 0;
    let mut lines = Vec::new();
    for (t, trial) in trials.iter().enumerate() {
        let pass = trial.isolated
            && trial.greedy_loss <= bound
            && trial.random_mean >= 1.2 * trial.greedy_loss;
        ok += usize::from(pass);
        lines.push(format!(
            "seed {t}: isolated={} greedy={:.3} (≤{bound:.2}) random_mean={:.1} ratio={:.2} → {}",
            trial.isolated,
            trial.greedy_loss,
            trial.random_mean,
            trial.random_mean / trial.greedy_loss,
            if pass { "ok" } else { "FAIL" }
        ));
    }
    CheckResult::new(
        "spiked-separation",
        ok * 10 >= data_seeds * 9,
        format!("{ok}/{data_seeds} data seeds passed\n{}", lines.join("\n")),
    )
}

struct ZipfSeparationTrial {
    greedy_loss: f64,
    random_mean: f64,
}

fn zipf_separation_trial(data_seed: u64) -> ZipfSeparationTrial {
    let params = |s| ZipfParams { h_n: 4, d: 64, seed: s };
    let members: Vec<DenseMatrix<f64>> = (0..2)
        .map(|i| gen_zipf(&params(data_seed.wrapping_add(i))).unwrap())
        .collect();
    let tr = TrainSet::new(members).unwrap();
    let (m, k) = (14usize, 14usize);
    let sketch = greedy_positions(&tr, &GreedyConfig::new(m, k)).unwrap();
    let greedy_loss = mean_proxy_loss(&tr, &sketch, k, ProxyKind::Rowspace).unwrap();
    let random_mean = (0..50)
        .map(|t| {
            let r =
                CountSketch::<f64>::random(m, tr.rows(), data_seed.wrapping_add(1000 + t)).unwrap();
            mean_proxy_loss(&tr, &r, k, ProxyKind::Rowspace).unwrap()
        })
        .sum::<f64>()
        / 50.0;
    ZipfSeparationTrial {
        greedy_loss,
        random_mean,
    }
}

/// Zipfian separation with `h_n = 4` (n = 60) and 14 bins: the greedy
/// loss must stay below `n²/2^{h_k−2}` and the mean random-placement loss
/// must reach 1.05× that same threshold, in ≥ 9 of 10 seeds.
///
/// The second clause bakes in the asymptotic constant of the
/// random-placement lower bound, which needs many norm levels above the
/// bin cutoff; at `h_k = 2` the measured mean lands well short of it even
/// though the greedy/random separation itself is large. The check
/// reports both the absolute margins and the separation ratio.
fn check_zipf_separation(data_seeds: usize, seed: u64) -> CheckResult {
    let n = 60.0f64;
    let threshold = n * n; // n² / 2^{h_k−2} with h_k = 2
    let trials: Vec<ZipfSeparationTrial> = (0..data_seeds)
        .into_par_iter()
        .map(|t| zipf_separation_trial(seed.wrapping_add(t as u64 * 100)))
        .collect();
    let mut ok = 0;
    let mut lines = Vec::new();
    for (t, trial) in trials.iter().enumerate() {
        let pass = trial.greedy_loss < threshold && trial.random_mean >= 1.05 * threshold;
        ok += usize::from(pass);
        lines.push(format!(
            "seed {t}: greedy={:.1} (<{threshold:.0}) random_mean={:.1} (≥{:.0}) sep_ratio={:.2} → {}",
            trial.greedy_loss,
            trial.random_mean,
            1.05 * threshold,
            trial.random_mean / trial.greedy_loss,
            if pass { "ok" } else { "FAIL" }
        ));
    }
    CheckResult::new(
        "zipf-separation",
        ok * 10 >= data_seeds * 9,
        format!("{ok}/{data_seeds} data seeds passed\n{}", lines.join("\n")),
    )
}

// ── Estimation and selection ────────────────────────────────────────

/// `‖SA‖_F²` with a 4-bin CountSketch lands within (1 ± 0.5)·‖A‖_F² in at
/// least 2/3 of trials.
fn check_frobenius_estimate(trials: usize, seed: u64) -> CheckResult {
    let a = gaussian_matrix(64, 32, seed);
    let exact = a.frob_sq();
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = CountSketch::<f64>::random(4, 64, seed.wrapping_add(1 + t as u64)).unwrap();
            let est = AnySketch::from(s).apply_left(&a).unwrap().frob_sq();
            usize::from(est >= 0.5 * exact && est <= 1.5 * exact)
        })
        .sum();
    let need = trials * 2 / 3;
    CheckResult::new(
        "frobenius-estimate",
        hits >= need,
        format!("{hits}/{trials} estimates within (1±0.5)·‖A‖² (need ≥ {need})"),
    )
}

/// With the learned sketch corrupted to all-zero values, the sketched
/// cost comparison picks the classical branch in ≥ 90 of 100 seeds. The
/// classical side runs at its default sizes so its own cost stays near
/// the optimum.
fn check_approxcheck_lra(trials: usize, seed: u64) -> CheckResult {
    let (n, d, k) = (64usize, 256usize, 4usize);
    let m_classical = (4 * k * k).max(k + 10);
    let a = gen_spiked::<f64>(&SpikedParams {
        n,
        d,
        s: 3,
        ell: 16.0,
        heavy_indices: None,
        seed,
    })
    .unwrap();
    let chosen_classical: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let base = seed.wrapping_add(10 + t as u64 * 10);
            let zero_s = CountSketch::new(m_classical, vec![0; n], vec![0.0; n]).unwrap();
            let zero_r = CountSketch::new(m_classical, vec![0; d], vec![0.0; d]).unwrap();
            let learned =
                LraSketchSet::with_learned(zero_s.into(), zero_r.into(), n, d, base).unwrap();
            let classical = LraSketchSet::classical(n, d, k, base + 2).unwrap();
            let (_, chosen) = approx_check_lra(&a, &learned, &classical, k, 64, base + 6).unwrap();
            usize::from(chosen == Chosen::Classical)
        })
        .sum();
    let need = trials * 9 / 10;
    CheckResult::new(
        "approxcheck-lra",
        chosen_classical >= need,
        format!("classical chosen {chosen_classical}/{trials} (need ≥ {need})"),
    )
}

/// The k-means comparison is exact, so a degenerate learned sketch loses
/// in every seed.
fn check_approxcheck_kmeans(trials: usize, seed: u64) -> CheckResult {
    let k = 4;
    let (a, _) = gen_gaussian_clusters::<f64>(60, 16, k, 12.0, seed).unwrap();
    let chosen_classical: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let base = seed.wrapping_add(10 + t as u64 * 10);
            let zero: AnySketch<f64> =
                CountSketch::new(8, vec![0; 60], vec![0.0; 60]).unwrap().into();
            let classical: AnySketch<f64> =
                CountSketch::<f64>::random(8, 60, base).unwrap().into();
            let (_, chosen) = approx_check_kmeans(&a, &zero, &classical, k, base + 1).unwrap();
            usize::from(chosen == Chosen::Classical)
        })
        .sum();
    CheckResult::new(
        "approxcheck-kmeans",
        chosen_classical == trials,
        format!("classical chosen {chosen_classical}/{trials} (need all)"),
    )
}

/// Classical four-sketch pipeline at default sizes on Gaussian data:
/// median cost within 1.5× of the truncated-SVD optimum; and with
/// lossless sketches on a rank-≤k input the cost vanishes.
fn check_lra_end_to_end(trials: usize, seed: u64) -> CheckResult {
    let k = 4;
    let a = gaussian_matrix(64, 48, seed);
    let opt = a.sub(&truncate_rank_k(&a, k).unwrap()).frob_sq();
    let mut costs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let set =
                LraSketchSet::classical(64, 48, k, seed.wrapping_add(1 + t as u64 * 4)).unwrap();
            let f = sketch_lowrank(&a, &set, k).unwrap();
            lra_cost(&a, &f)
        })
        .collect();
    costs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let median = costs[costs.len() / 2];

    let low = gaussian_matrix(32, k, seed + 7).matmul(&gaussian_matrix(k, 32, seed + 8));
    let lossless = LraSketchSet::new(
        CountSketch::<f64>::identity_permutation(32, 32).unwrap().into(),
        CountSketch::<f64>::identity_permutation(32, 32).unwrap().into(),
        CountSketch::<f64>::identity_permutation(32, 32).unwrap().into(),
        CountSketch::<f64>::identity_permutation(32, 32).unwrap().into(),
    )
    .unwrap();
    let lossless_cost = lra_cost(&low, &sketch_lowrank(&low, &lossless, k).unwrap());

    let passed = median <= 1.5 * opt && lossless_cost <= 1e-9;
    CheckResult::new(
        "lra-end-to-end",
        passed,
        format!(
            "median cost {median:.2} vs optimum {opt:.2} (ratio {:.3}, limit 1.5); lossless cost {lossless_cost:.2e}",
            median / opt
        ),
    )
}

// ── Learning order ──────────────────────────────────────────────────

struct LearningOrderTrial {
    ours: f64,
    ivy: f64,
    classical: f64,
}

fn learning_order_trial(data_seed: u64, value_steps: usize) -> LearningOrderTrial {
    let (n, d, s_count, ell, m, k) = (32usize, 4096usize, 6usize, 16.0, 8usize, 8usize);
    let draw = |i: u64| {
        gen_spiked::<f64>(&SpikedParams {
            n,
            d,
            s: s_count,
            ell,
            heavy_indices: None,
            seed: data_seed.wrapping_add(i),
        })
        .unwrap()
    };
    let train = TrainSet::new((0..8).map(draw).collect()).unwrap();
    let test = TrainSet::new((8..10).map(draw).collect()).unwrap();

    let ours = train_pipeline(&train, &GreedyConfig::new(m, k), value_steps, 0.1).unwrap();
    let ivy = ivy19_baseline(
        &train,
        m,
        k,
        ProxyKind::Rowspace,
        data_seed + 55,
        value_steps,
        0.1,
    )
    .unwrap();
    // Classical shares the IVY19 position draw, isolating the effect of
    // value learning.
    let classical = CountSketch::<f64>::random(m, n, data_seed + 55).unwrap();

    LearningOrderTrial {
        ours: mean_proxy_loss(&test, &ours, k, ProxyKind::Rowspace).unwrap(),
        ivy: mean_proxy_loss(&test, &ivy, k, ProxyKind::Rowspace).unwrap(),
        classical: mean_proxy_loss(&test, &classical, k, ProxyKind::Rowspace).unwrap(),
    }
}

/// Held-out proxy loss ordering over spiked training sets:
/// positions+values ≤ values-only ≤ classical in the mean over seeds,
/// with the full pipeline at least 20% ahead of classical.
fn check_learning_order(data_seeds: usize, seed: u64) -> CheckResult {
    let trials: Vec<LearningOrderTrial> = (0..data_seeds)
        .into_par_iter()
        .map(|t| learning_order_trial(seed.wrapping_add(t as u64 * 1000), 100))
        .collect();
    let mean = |f: &dyn Fn(&LearningOrderTrial) -> f64| {
        trials.iter().map(|t| f(t)).sum::<f64>() / trials.len() as f64
    };
    let ours = mean(&|t| t.ours);
    let ivy = mean(&|t| t.ivy);
    let classical = mean(&|t| t.classical);
    let passed = ours <= ivy && ivy <= classical && ours <= 0.8 * classical;
    CheckResult::new(
        "learning-order",
        passed,
        format!(
            "mean held-out proxy loss: ours {ours:.3} ≤ ivy19 {ivy:.3} ≤ classical {classical:.3}; ours/classical = {:.3} (need ≤ 0.8)",
            ours / classical
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    // The statistically heavy checks run from the acceptance suite; the
    // quick exact ones are smoke-tested here at reduced trial counts.

    #[test]
    fn monotonicity_lra_small() {
        let r = check_monotonicity_lra(10, 7);
        assert!(r.passed, "{}", r.detail);
    }

    #[test]
    fn frobenius_estimate_small() {
        let r = check_frobenius_estimate(60, 3);
        assert!(r.passed, "{}", r.detail);
    }

    #[test]
    fn unknown_check_is_an_error() {
        assert!(run_check("no-such-check", None, 0).is_err());
    }
}
