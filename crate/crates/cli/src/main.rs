//! `sketchlearn` — generate synthetic data, train sketches, evaluate the
//! sketched solvers, run the verification suites and benchmark kernels.

mod bench;
mod eval;
mod gen;
mod manifest;
mod train;
mod verify;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "sketchlearn",
    version,
    about = "Learned CountSketch compression for low-rank approximation and k-means"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic matrix datasets with a manifest.
    Gen(gen::GenArgs),
    /// Train a sketch on a dataset and write it as JSON.
    Train(train::TrainArgs),
    /// Evaluate sketching methods on held-out data (TSV report).
    Eval(eval::EvalArgs),
    /// Run the named verification suites; nonzero exit on failure.
    Verify(verify::VerifyArgs),
    /// Time offline training and online solves (TSV report).
    Bench(bench::BenchArgs),
}

fn main() {
    // LS_THREADS bounds worker parallelism across all subcommands.
    if let Ok(threads) = std::env::var("LS_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("warning: ignoring invalid LS_THREADS value '{threads}'");
            }
        }
    }

    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => gen::run(args),
        Command::Train(args) => train::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Verify(args) => verify::run(args),
        Command::Bench(args) => bench::run(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}

/// Overlay non-null CLI values onto an optional JSON config with the same
/// field names; CLI flags win.
pub(crate) fn merge_config<T>(cli: &T, config: Option<&std::path::Path>) -> Result<T, String>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let cli_value = serde_json::to_value(cli).map_err(|e| e.to_string())?;
    let Some(path) = config else {
        return serde_json::from_value(cli_value).map_err(|e| e.to_string());
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut base: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if !base.is_object() {
        return Err(format!("{}: config must be a JSON object", path.display()));
    }
    if let (Some(base_map), serde_json::Value::Object(cli_map)) = (base.as_object_mut(), cli_value)
    {
        for (key, value) in cli_map {
            if !value.is_null() {
                base_map.insert(key, value);
            }
        }
    }
    serde_json::from_value(base).map_err(|e| format!("{}: {e}", path.display()))
}
