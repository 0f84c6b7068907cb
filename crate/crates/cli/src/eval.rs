//! `eval` — per-method approximation error Δ = achieved − optimal on the
//! held-out members, reported as mean ± std in a TSV.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sketchlearn::kmeans::{lloyd_kmeanspp, sketch_kmeans, DEFAULT_MAX_ITERS};
use sketchlearn::learn::{OrderingRule, ProxyKind, SignSet, TrainSet};
use sketchlearn::lra::{lra_cost, sketch_lowrank, LraSketchSet};
use sketchlearn::matlin::{truncate_rank_k, DenseMatrix};
use sketchlearn::sketch::AnySketch;
use sketchlearn::{Error, Result};

use crate::manifest::Manifest;
use crate::train::{fit_sketch, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Lra,
    Kmeans,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Task::Lra => write!(f, "lra"),
            Task::Kmeans => write!(f, "kmeans"),
        }
    }
}

#[derive(Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    /// Rank (LRA) or cluster count (k-means).
    #[arg(long)]
    pub k: Option<usize>,
    /// Sketch bin count for the learned/classical CountSketches.
    #[arg(long)]
    pub m: Option<usize>,
    /// Methods to evaluate (default: all five).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub value_steps: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
    /// Output TSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config with the same field names; explicit flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn run(cli: EvalArgs) -> Result<()> {
    let config = cli.config.clone();
    let args: EvalArgs =
        crate::merge_config(&cli, config.as_deref()).map_err(Error::InvalidInput)?;
    let data = args
        .data
        .ok_or_else(|| Error::InvalidInput("--data is required".into()))?;
    let task = args
        .task
        .ok_or_else(|| Error::InvalidInput("--task is required".into()))?;
    let k = args.k.ok_or_else(|| Error::InvalidInput("--k is required".into()))?;
    let m = args.m.ok_or_else(|| Error::InvalidInput("--m is required".into()))?;
    let methods = args.methods.unwrap_or_else(|| {
        vec![
            Method::Ours,
            Method::Ivy19,
            Method::Classical,
            Method::ExactSvd,
            Method::ColSampling,
        ]
    });
    let trials = args.trials.unwrap_or(10);
    let seed = args.seed.unwrap_or(0);
    let value_steps = args.value_steps.unwrap_or(200);
    let step_size = args.step_size.unwrap_or(0.1);

    let manifest = Manifest::load(&data)?;
    let tr = manifest.train_set(&data)?;
    let tests = manifest.test_matrices(&data)?;
    if tests.is_empty() {
        return Err(Error::InvalidInput("dataset has no test members".into()));
    }

    let mut report = String::new();
    match task {
        Task::Lra => {
            report.push_str("# optimum: exact rank-k cost via truncated SVD\n");
            report.push_str("task\tn\td\tk\tm\tmethod\tmean_delta\tstd_delta\ttrials\n");
            let optima: Vec<f64> = tests
                .iter()
                .map(|a| {
                    let t = truncate_rank_k(a, k)?;
                    Ok(a.sub(&t).frob_sq())
                })
                .collect::<Result<_>>()?;
            for method in &methods {
                let deltas = eval_lra_method(
                    &tr, &tests, &optima, *method, k, m, seed, trials, value_steps, step_size,
                )?;
                let (mean, std) = mean_std(&deltas);
                report.push_str(&format!(
                    "lra\t{}\t{}\t{k}\t{m}\t{method}\t{mean:.6e}\t{std:.6e}\t{trials}\n",
                    manifest.n, manifest.d
                ));
            }
        }
        Task::Kmeans => {
            report.push_str(
                "# optimum: surrogate = best of 20 seeded Lloyd runs on the full data (exact k-means is intractable)\n",
            );
            report.push_str("task\tn\td\tk\tm\tmethod\tmean_delta\tstd_delta\ttrials\n");
            let optima: Vec<f64> = tests
                .iter()
                .map(|a| {
                    let mut best = f64::INFINITY;
                    for s in 0..20 {
                        let c = lloyd_kmeanspp(a, k, seed.wrapping_add(s), DEFAULT_MAX_ITERS)?;
                        best = best.min(c.cost);
                    }
                    Ok(best)
                })
                .collect::<Result<_>>()?;
            for method in &methods {
                let deltas = eval_kmeans_method(
                    &tr, &tests, &optima, *method, k, m, seed, trials, value_steps, step_size,
                )?;
                let (mean, std) = mean_std(&deltas);
                report.push_str(&format!(
                    "kmeans\t{}\t{}\t{k}\t{m}\t{method}\t{mean:.6e}\t{std:.6e}\t{trials}\n",
                    manifest.n, manifest.d
                ));
            }
        }
    }

    match &args.out {
        Some(path) => std::fs::write(path, &report)?,
        None => print!("{report}"),
    }
    Ok(())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[allow(clippy::too_many_arguments)]
fn eval_lra_method(
    tr: &TrainSet<f64>,
    tests: &[DenseMatrix<f64>],
    optima: &[f64],
    method: Method,
    k: usize,
    m: usize,
    seed: u64,
    trials: usize,
    value_steps: usize,
    step_size: f64,
) -> Result<Vec<f64>> {
    let (n, d) = (tr.rows(), tr.cols());
    // Learned sketches are trained once; classical ones are drawn per
    // trial. The V/W enlargement pair is always drawn fresh per trial.
    let trained: Option<(AnySketch<f64>, AnySketch<f64>)> = match method {
        Method::Classical => None,
        _ => {
            let s = fit_sketch(
                tr,
                method,
                m,
                k,
                ProxyKind::Rowspace,
                OrderingRule::NonincreasingNorm,
                SignSet::Both,
                seed,
                value_steps,
                step_size,
            )?;
            let r = fit_sketch(
                tr,
                method,
                m,
                k,
                ProxyKind::Colspace,
                OrderingRule::NonincreasingNorm,
                SignSet::Both,
                seed.wrapping_add(1),
                value_steps,
                step_size,
            )?;
            Some((s.sketch, r.sketch))
        }
    };

    let mut deltas = Vec::with_capacity(tests.len() * trials);
    for trial in 0..trials {
        let trial_seed = seed.wrapping_add(7919 * trial as u64);
        let set = match &trained {
            Some((s, r)) => {
                LraSketchSet::with_learned(s.clone(), r.clone(), n, d, trial_seed)?
            }
            None => LraSketchSet::classical_sized(n, d, m, m, 2 * m, 2 * m, trial_seed)?,
        };
        for (a, &opt) in tests.iter().zip(optima) {
            let f = sketch_lowrank(a, &set, k)?;
            deltas.push(lra_cost(a, &f) - opt);
        }
    }
    Ok(deltas)
}

#[allow(clippy::too_many_arguments)]
fn eval_kmeans_method(
    tr: &TrainSet<f64>,
    tests: &[DenseMatrix<f64>],
    optima: &[f64],
    method: Method,
    k: usize,
    m: usize,
    seed: u64,
    trials: usize,
    value_steps: usize,
    step_size: f64,
) -> Result<Vec<f64>> {
    let trained: Option<AnySketch<f64>> = match method {
        Method::Classical => None,
        _ => Some(
            fit_sketch(
                tr,
                method,
                m,
                k,
                ProxyKind::Rowspace,
                OrderingRule::NonincreasingNorm,
                SignSet::Both,
                seed,
                value_steps,
                step_size,
            )?
            .sketch,
        ),
    };
    let mut deltas = Vec::with_capacity(tests.len() * trials);
    for trial in 0..trials {
        let trial_seed = seed.wrapping_add(7919 * trial as u64);
        let sketch = match &trained {
            Some(s) => s.clone(),
            None => sketchlearn::sketch::CountSketch::random(m, tr.rows(), trial_seed)?.into(),
        };
        for (a, &opt) in tests.iter().zip(optima) {
            let c = sketch_kmeans(a, &sketch, k, trial_seed)?;
            deltas.push(c.cost - opt);
        }
    }
    Ok(deltas)
}
