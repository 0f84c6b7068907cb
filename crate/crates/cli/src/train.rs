//! `train` — fit one sketch on a dataset's training members.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sketchlearn::learn::{
    self, GreedyConfig, OrderingRule, ProxyKind, SignSet, SketchSide, TrainSet,
};
use sketchlearn::sketch::{AnySketch, CountSketch};
use sketchlearn::{io, Error, Result};

use crate::manifest::Manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Greedy positions + learned values.
    Ours,
    /// Random positions, learned values.
    Ivy19,
    /// Random positions and values.
    Classical,
    /// Dense top-m singular vectors of one training sample.
    ExactSvd,
    /// Norm-proportional row sampling from one training sample.
    ColSampling,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Method::Ours => "ours",
            Method::Ivy19 => "ivy19",
            Method::Classical => "classical",
            Method::ExactSvd => "exact-svd",
            Method::ColSampling => "col-sampling",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProxyArg {
    Rowspace,
    Colspace,
}

impl From<ProxyArg> for ProxyKind {
    fn from(p: ProxyArg) -> ProxyKind {
        match p {
            ProxyArg::Rowspace => ProxyKind::Rowspace,
            ProxyArg::Colspace => ProxyKind::Colspace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingArg {
    /// Non-increasing max row norm (the analyzed default).
    Norm,
    /// Natural column order.
    Column,
    /// Seeded shuffle (uses --seed).
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignsArg {
    Both,
    Plus,
    Minus,
}

impl From<SignsArg> for SignSet {
    fn from(s: SignsArg) -> SignSet {
        match s {
            SignsArg::Both => SignSet::Both,
            SignsArg::Plus => SignSet::PlusOnly,
            SignsArg::Minus => SignSet::MinusOnly,
        }
    }
}

#[derive(Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Dataset directory (from `gen`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Sketch bin count.
    #[arg(long)]
    pub m: Option<usize>,
    /// Target rank of the surrogate loss.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub proxy: Option<ProxyArg>,
    #[arg(long, value_enum)]
    pub ordering: Option<OrderingArg>,
    #[arg(long, value_enum)]
    pub signs: Option<SignsArg>,
    #[arg(long)]
    pub value_steps: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output sketch JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional training-trace TSV (step, loss).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// JSON config with the same field names; explicit flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub struct TrainedSketch {
    pub sketch: AnySketch<f64>,
    pub trace: Vec<f64>,
}

/// Fit one sketch; shared by `train`, `eval` and `bench`.
pub fn fit_sketch(
    tr: &TrainSet<f64>,
    method: Method,
    m: usize,
    k: usize,
    proxy: ProxyKind,
    ordering: OrderingRule,
    signs: SignSet,
    seed: u64,
    value_steps: usize,
    step_size: f64,
) -> Result<TrainedSketch> {
    let hashed_dim = match proxy {
        ProxyKind::Rowspace => tr.rows(),
        ProxyKind::Colspace => tr.cols(),
    };
    match method {
        Method::Ours => {
            let cfg = GreedyConfig {
                m,
                k,
                ordering,
                signs,
                proxy,
            };
            let placed = learn::greedy_positions(tr, &cfg)?;
            let (values, trace) = learn::optimize_values(
                tr,
                placed.positions(),
                placed.values(),
                k,
                proxy,
                value_steps,
                step_size,
            )?;
            Ok(TrainedSketch {
                sketch: placed.with_values(values)?.into(),
                trace,
            })
        }
        Method::Ivy19 => {
            let start = CountSketch::random(m, hashed_dim, seed)?;
            let (values, trace) = learn::optimize_values(
                tr,
                start.positions(),
                start.values(),
                k,
                proxy,
                value_steps,
                step_size,
            )?;
            Ok(TrainedSketch {
                sketch: start.with_values(values)?.into(),
                trace,
            })
        }
        // The remaining constructions have no descent trace; their
        // training loss is computed on demand by the caller.
        Method::Classical => Ok(TrainedSketch {
            sketch: CountSketch::random(m, hashed_dim, seed)?.into(),
            trace: Vec::new(),
        }),
        Method::ExactSvd => {
            let side = match proxy {
                ProxyKind::Rowspace => SketchSide::Rows,
                ProxyKind::Colspace => SketchSide::Cols,
            };
            let dense = learn::exact_svd_sketch(&tr.members()[0], m, side)?;
            Ok(TrainedSketch {
                sketch: dense.into(),
                trace: Vec::new(),
            })
        }
        Method::ColSampling => {
            let sample = match proxy {
                ProxyKind::Rowspace => tr.members()[0].clone(),
                ProxyKind::Colspace => tr.members()[0].transpose(),
            };
            let sketch = learn::column_sampling_sketch(&sample, m, seed)?;
            Ok(TrainedSketch {
                sketch: sketch.into(),
                trace: Vec::new(),
            })
        }
    }
}

pub fn mean_any_proxy_loss(
    tr: &TrainSet<f64>,
    sketch: &AnySketch<f64>,
    k: usize,
    proxy: ProxyKind,
) -> Result<f64> {
    let mut total = 0.0;
    for member in tr.members() {
        total += learn::proxy_loss(sketch, member, k, proxy)?;
    }
    Ok(total / tr.members().len() as f64)
}

pub fn run(cli: TrainArgs) -> Result<()> {
    let config = cli.config.clone();
    let args: TrainArgs =
        crate::merge_config(&cli, config.as_deref()).map_err(Error::InvalidInput)?;
    let data = args
        .data
        .ok_or_else(|| Error::InvalidInput("--data is required".into()))?;
    let method = args
        .method
        .ok_or_else(|| Error::InvalidInput("--method is required".into()))?;
    let m = args.m.ok_or_else(|| Error::InvalidInput("--m is required".into()))?;
    let k = args.k.ok_or_else(|| Error::InvalidInput("--k is required".into()))?;
    let out = args
        .out
        .ok_or_else(|| Error::InvalidInput("--out is required".into()))?;
    let proxy: ProxyKind = args.proxy.unwrap_or(ProxyArg::Rowspace).into();
    let seed = args.seed.unwrap_or(0);
    let ordering = match args.ordering.unwrap_or(OrderingArg::Norm) {
        OrderingArg::Norm => OrderingRule::NonincreasingNorm,
        OrderingArg::Column => OrderingRule::ColumnOrder,
        OrderingArg::Random => OrderingRule::Random(seed),
    };
    let signs: SignSet = args.signs.unwrap_or(SignsArg::Both).into();
    let value_steps = args.value_steps.unwrap_or(200);
    let step_size = args.step_size.unwrap_or(0.1);

    let manifest = Manifest::load(&data)?;
    let tr = manifest.train_set(&data)?;
    let hashed_dim = match proxy {
        ProxyKind::Rowspace => tr.rows(),
        ProxyKind::Colspace => tr.cols(),
    };
    if m > hashed_dim {
        eprintln!(
            "warning: m = {m} exceeds the hashed dimension {hashed_dim}; extra bins stay empty"
        );
    }

    let mut trained = fit_sketch(
        &tr, method, m, k, proxy, ordering, signs, seed, value_steps, step_size,
    )?;
    if trained.trace.is_empty() {
        trained.trace = vec![mean_any_proxy_loss(&tr, &trained.sketch, k, proxy)?];
    }
    io::write_sketch(&out, &trained.sketch)?;
    if let Some(trace_path) = &args.trace {
        let mut text = String::from("step\tloss\n");
        for (step, loss) in trained.trace.iter().enumerate() {
            text.push_str(&format!("{step}\t{loss:.9e}\n"));
        }
        std::fs::write(trace_path, text)?;
    }
    println!(
        "trained {method} sketch (m={m}, k={k}) on {} members; final loss {:.6e} -> {}",
        tr.members().len(),
        trained.trace.last().copied().unwrap_or(f64::NAN),
        out.display()
    );
    Ok(())
}
