//! `bench` — wall-clock medians for offline training and online solving.
//! Numbers are reported, not asserted.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sketchlearn::gen::{gen_spiked, SpikedParams};
use sketchlearn::kmeans::sketch_kmeans;
use sketchlearn::learn::{OrderingRule, ProxyKind, SignSet, TrainSet};
use sketchlearn::lra::{sketch_lowrank, LraSketchSet};
use sketchlearn::{Error, Result};

use crate::eval::Task;
use crate::train::{fit_sketch, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchTask {
    Lra,
    Kmeans,
}

#[derive(Args, Serialize, Deserialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub train_members: Option<usize>,
    #[arg(long)]
    pub value_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output TSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config with the same field names; explicit flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

pub fn run(cli: BenchArgs) -> Result<()> {
    let config = cli.config.clone();
    let args: BenchArgs =
        crate::merge_config(&cli, config.as_deref()).map_err(Error::InvalidInput)?;
    let n = args.n.unwrap_or(1024);
    let d = args.d.unwrap_or(512);
    let k = args.k.unwrap_or(10);
    let m = args.m.unwrap_or(2 * k);
    let task = args.task.unwrap_or(Task::Lra);
    let methods = args.methods.unwrap_or_else(|| {
        vec![
            Method::Ours,
            Method::Ivy19,
            Method::Classical,
            Method::ExactSvd,
            Method::ColSampling,
        ]
    });
    let trials = args.trials.unwrap_or(5).max(1);
    let members = args.train_members.unwrap_or(2).max(1);
    let value_steps = args.value_steps.unwrap_or(20);
    let seed = args.seed.unwrap_or(0);

    let s_count = (k / 2).max(1).min(n - 1);
    let draw = |i: u64| {
        gen_spiked::<f64>(&SpikedParams {
            n,
            d,
            s: s_count,
            ell: 8.0,
            heavy_indices: None,
            seed: seed.wrapping_add(i),
        })
    };
    let tr = TrainSet::new((0..members as u64).map(draw).collect::<Result<_>>()?)?;
    let target = draw(members as u64)?;

    let mut report = String::from("method\toffline_s\tonline_s\ttrials\n");
    for method in &methods {
        let mut offline = Vec::with_capacity(trials);
        let mut sketch_pair = None;
        for t in 0..trials {
            let t0 = Instant::now();
            let s = fit_sketch(
                &tr,
                *method,
                m,
                k,
                ProxyKind::Rowspace,
                OrderingRule::NonincreasingNorm,
                SignSet::Both,
                seed.wrapping_add(t as u64),
                value_steps,
                0.1,
            )?;
            let r = match task {
                Task::Lra => Some(fit_sketch(
                    &tr,
                    *method,
                    m,
                    k,
                    ProxyKind::Colspace,
                    OrderingRule::NonincreasingNorm,
                    SignSet::Both,
                    seed.wrapping_add(1000 + t as u64),
                    value_steps,
                    0.1,
                )?),
                Task::Kmeans => None,
            };
            offline.push(t0.elapsed().as_secs_f64());
            sketch_pair = Some((s.sketch, r.map(|x| x.sketch)));
        }
        let (s_sketch, r_sketch) = sketch_pair.expect("at least one trial");

        let mut online = Vec::with_capacity(trials);
        for t in 0..trials {
            let trial_seed = seed.wrapping_add(31 * t as u64);
            match task {
                Task::Lra => {
                    let set = LraSketchSet::with_learned(
                        s_sketch.clone(),
                        r_sketch.clone().expect("lra trains both sides"),
                        n,
                        d,
                        trial_seed,
                    )?;
                    let t0 = Instant::now();
                    let f = sketch_lowrank(&target, &set, k)?;
                    online.push(t0.elapsed().as_secs_f64());
                    std::hint::black_box(f.left.frob_sq());
                }
                Task::Kmeans => {
                    let t0 = Instant::now();
                    let c = sketch_kmeans(&target, &s_sketch, k, trial_seed)?;
                    online.push(t0.elapsed().as_secs_f64());
                    std::hint::black_box(c.cost);
                }
            }
        }
        report.push_str(&format!(
            "{method}\t{:.6}\t{:.6}\t{trials}\n",
            median(offline),
            median(online)
        ));
    }

    match &args.out {
        Some(path) => std::fs::write(path, &report)?,
        None => print!("{report}"),
    }
    Ok(())
}
