//! `gen` — write train/test matrix files plus a regenerating manifest.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde_json::json;
use sketchlearn::gen::{gen_gaussian_clusters, gen_spiked, gen_zipf, SpikedParams, ZipfParams};
use sketchlearn::matlin::DenseMatrix;
use sketchlearn::{io, Error, Result};

use crate::manifest::{member_path, FileEntry, Manifest};

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub family: Family,
}

#[derive(Subcommand)]
pub enum Family {
    /// Random unit rows with `s` fixed heavy rows of norm `ell`.
    Spiked {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        ell: f64,
        /// Comma-separated 0-based heavy row indices (default: first s rows).
        #[arg(long, value_delimiter = ',')]
        heavy_indices: Option<Vec<usize>>,
        #[arg(long, default_value_t = 8)]
        train: usize,
        #[arg(long, default_value_t = 2)]
        test: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Orthogonal rows with 2^{i+1} rows of squared norm n²/2^{2i} per
    /// level i = 1..=h_n (n = 2^{h_n+2} − 4).
    Zipf {
        #[arg(long)]
        h_n: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 8)]
        train: usize,
        #[arg(long, default_value_t = 2)]
        test: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Planted Gaussian clusters (k-means test data, with labels).
    Clusters {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10.0)]
        separation: f64,
        #[arg(long, default_value_t = 8)]
        train: usize,
        #[arg(long, default_value_t = 2)]
        test: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn draw_seed(base: u64, role: &str, index: usize) -> u64 {
    let offset = if role == "test" { 1_000_000 } else { 0 };
    base.wrapping_add(offset).wrapping_add(index as u64)
}

pub fn run(args: GenArgs) -> Result<()> {
    let (out, kind, params, train_count, test_count, seed, draw): (
        PathBuf,
        &str,
        serde_json::Value,
        usize,
        usize,
        u64,
        Box<dyn Fn(u64, &PathBuf) -> Result<(usize, usize)>>,
    ) = match args.family {
        Family::Spiked {
            n,
            d,
            s,
            ell,
            heavy_indices,
            train,
            test,
            seed,
            out,
        } => {
            let heavy = heavy_indices.clone();
            let params = json!({
                "n": n, "d": d, "s": s, "ell": ell,
                "heavy_indices": heavy, "seed": seed,
            });
            let draw = move |member_seed: u64, path: &PathBuf| -> Result<(usize, usize)> {
                let a: DenseMatrix<f64> = gen_spiked(&SpikedParams {
                    n,
                    d,
                    s,
                    ell,
                    heavy_indices: heavy.clone(),
                    seed: member_seed,
                })?;
                io::write_matrix(path, &a)?;
                Ok((a.rows(), a.cols()))
            };
            (out, "spiked", params, train, test, seed, Box::new(draw))
        }
        Family::Zipf {
            h_n,
            d,
            train,
            test,
            seed,
            out,
        } => {
            let params = json!({"h_n": h_n, "d": d, "seed": seed});
            let draw = move |member_seed: u64, path: &PathBuf| -> Result<(usize, usize)> {
                let a: DenseMatrix<f64> = gen_zipf(&ZipfParams {
                    h_n,
                    d,
                    seed: member_seed,
                })?;
                io::write_matrix(path, &a)?;
                Ok((a.rows(), a.cols()))
            };
            (out, "zipf", params, train, test, seed, Box::new(draw))
        }
        Family::Clusters {
            n,
            d,
            k,
            separation,
            train,
            test,
            seed,
            out,
        } => {
            let params = json!({
                "n": n, "d": d, "k": k, "separation": separation, "seed": seed,
            });
            let draw = move |member_seed: u64, path: &PathBuf| -> Result<(usize, usize)> {
                let (a, labels): (DenseMatrix<f64>, Vec<usize>) =
                    gen_gaussian_clusters(n, d, k, separation, member_seed)?;
                io::write_matrix(path, &a)?;
                let labels_path = path.with_extension("labels.json");
                std::fs::write(
                    labels_path,
                    serde_json::to_string(&labels).map_err(|e| Error::Io(e.to_string()))?,
                )?;
                Ok((a.rows(), a.cols()))
            };
            (out, "clusters", params, train, test, seed, Box::new(draw))
        }
    };

    if train_count == 0 {
        return Err(Error::InvalidInput("need at least one training member".into()));
    }
    std::fs::create_dir_all(&out)?;

    let mut shape = (0usize, 0usize);
    let mut train_entries = Vec::new();
    for i in 0..train_count {
        let path = member_path(&out, "train", i);
        let member_seed = draw_seed(seed, "train", i);
        shape = draw(member_seed, &path)?;
        train_entries.push(FileEntry {
            file: path.file_name().unwrap().to_string_lossy().into_owned(),
            seed: member_seed,
        });
    }
    let mut test_entries = Vec::new();
    for i in 0..test_count {
        let path = member_path(&out, "test", i);
        let member_seed = draw_seed(seed, "test", i);
        shape = draw(member_seed, &path)?;
        test_entries.push(FileEntry {
            file: path.file_name().unwrap().to_string_lossy().into_owned(),
            seed: member_seed,
        });
    }

    let manifest = Manifest {
        kind: kind.to_string(),
        params,
        n: shape.0,
        d: shape.1,
        train: train_entries,
        test: test_entries,
    };
    manifest.save(&out)?;
    println!(
        "wrote {} train + {} test members ({}x{}) to {}",
        train_count,
        test_count,
        shape.0,
        shape.1,
        out.display()
    );
    Ok(())
}
