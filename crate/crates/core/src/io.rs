//! File formats.
//!
//! Matrices travel in a small binary container: magic `LSKM`, version
//! byte `1`, row and column counts as little-endian `u64`, then the
//! entries as little-endian `f64` in row-major order. A `.csv` extension
//! switches the reader to plain numeric CSV. Sketches are UTF-8 JSON:
//! `{"m":…, "n":…, "p":[…], "v":[…]}` with 1-based bin indices in `p`
//! (internally they are 0-based), a stacked sketch as `{"parts":[…]}`,
//! and a dense compression matrix as `{"dense":{"rows":…, "cols":…,
//! "v":[…]}}`. Round-trips are bit-exact for finite values.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::matlin::DenseMatrix;
use crate::sketch::{AnySketch, CountSketch, StackedSketch};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"LSKM";
const VERSION: u8 = 1;

// ── Matrix binary format ────────────────────────────────────────────

pub fn matrix_to_bytes(a: &DenseMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(13 + 8 * a.rows() * a.cols());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(a.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(a.cols() as u64).to_le_bytes());
    for &x in a.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn matrix_from_bytes(bytes: &[u8]) -> Result<DenseMatrix<f64>> {
    if bytes.len() < 21 || &bytes[..4] != MAGIC {
        return Err(Error::Io("not a matrix file (bad magic)".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Io(format!("unsupported matrix format version {}", bytes[4])));
    }
    let rows = u64::from_le_bytes(bytes[5..13].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[13..21].try_into().unwrap()) as usize;
    let need = 21 + 8 * rows * cols;
    if bytes.len() != need {
        return Err(Error::Io(format!(
            "matrix payload is {} bytes, expected {need}",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for chunk in bytes[21..].chunks_exact(8) {
        data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    DenseMatrix::from_vec(rows, cols, data)
}

pub fn write_matrix(path: &Path, a: &DenseMatrix<f64>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&matrix_to_bytes(a))?;
    Ok(())
}

/// Read a matrix file; a `.csv` extension selects the CSV importer,
/// anything else the binary container.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix<f64>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return read_matrix_csv(path);
    }
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    matrix_from_bytes(&bytes)
}

fn read_matrix_csv(path: &Path) -> Result<DenseMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Io(e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::Io(format!("csv parse: {e}")))?);
    }
    DenseMatrix::from_rows(&rows)
}

// ── Sketch JSON ─────────────────────────────────────────────────────

fn count_to_json(s: &CountSketch<f64>) -> serde_json::Value {
    serde_json::json!({
        "m": s.bins(),
        "n": s.n(),
        "p": s.positions().iter().map(|&b| b + 1).collect::<Vec<_>>(),
        "v": s.values(),
    })
}

pub fn sketch_to_json(s: &AnySketch<f64>) -> serde_json::Value {
    match s {
        AnySketch::Count(c) => count_to_json(c),
        AnySketch::Stacked(st) => serde_json::json!({
            "parts": st.parts().iter().map(count_to_json).collect::<Vec<_>>(),
        }),
        AnySketch::Dense(d) => serde_json::json!({
            "dense": {
                "rows": d.rows(),
                "cols": d.cols(),
                "v": d.data(),
            }
        }),
    }
}

fn count_from_json(value: &serde_json::Value) -> Result<CountSketch<f64>> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Io("sketch json: expected object".into()))?;
    let m = obj
        .get("m")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| Error::Io("sketch json: missing m".into()))? as usize;
    let p_raw = obj
        .get("p")
        .and_then(|x| x.as_array())
        .ok_or_else(|| Error::Io("sketch json: missing p".into()))?;
    let v_raw = obj
        .get("v")
        .and_then(|x| x.as_array())
        .ok_or_else(|| Error::Io("sketch json: missing v".into()))?;
    let mut p = Vec::with_capacity(p_raw.len());
    for x in p_raw {
        let one_based = x
            .as_u64()
            .ok_or_else(|| Error::Io("sketch json: bad bin index".into()))? as usize;
        if one_based == 0 {
            return Err(Error::Io("sketch json: bin indices are 1-based".into()));
        }
        p.push(one_based - 1);
    }
    let mut v = Vec::with_capacity(v_raw.len());
    for x in v_raw {
        v.push(
            x.as_f64()
                .ok_or_else(|| Error::Io("sketch json: bad value".into()))?,
        );
    }
    if let Some(n) = obj.get("n").and_then(|x| x.as_u64()) {
        if n as usize != p.len() {
            return Err(Error::Io("sketch json: n does not match p length".into()));
        }
    }
    CountSketch::new(m, p, v)
}

pub fn sketch_from_json(value: &serde_json::Value) -> Result<AnySketch<f64>> {
    if let Some(parts) = value.get("parts") {
        let arr = parts
            .as_array()
            .ok_or_else(|| Error::Io("sketch json: parts must be an array".into()))?;
        let parts: Result<Vec<_>> = arr.iter().map(count_from_json).collect();
        return Ok(AnySketch::Stacked(StackedSketch::new(parts?)?));
    }
    if let Some(dense) = value.get("dense") {
        let rows = dense
            .get("rows")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Io("sketch json: dense.rows".into()))? as usize;
        let cols = dense
            .get("cols")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Io("sketch json: dense.cols".into()))? as usize;
        let data_raw = dense
            .get("v")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Io("sketch json: dense.v".into()))?;
        let mut data = Vec::with_capacity(data_raw.len());
        for x in data_raw {
            data.push(
                x.as_f64()
                    .ok_or_else(|| Error::Io("sketch json: bad dense value".into()))?,
            );
        }
        return Ok(AnySketch::Dense(DenseMatrix::from_vec(rows, cols, data)?));
    }
    Ok(AnySketch::Count(count_from_json(value)?))
}

pub fn write_sketch(path: &Path, s: &AnySketch<f64>) -> Result<()> {
    let json = serde_json::to_string_pretty(&sketch_to_json(s))
        .map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, json)?;
    Ok(())
}

pub fn read_sketch(path: &Path) -> Result<AnySketch<f64>> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))?;
    sketch_from_json(&value)
}
