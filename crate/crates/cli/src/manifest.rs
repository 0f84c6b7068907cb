//! Dataset manifest: enough information to regenerate every file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sketchlearn::learn::TrainSet;
use sketchlearn::matlin::DenseMatrix;
use sketchlearn::{io, Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    /// Generator family: spiked | zipf | clusters.
    pub kind: String,
    /// Generator parameters, including the base seed.
    pub params: serde_json::Value,
    pub n: usize,
    pub d: usize,
    pub train: Vec<FileEntry>,
    pub test: Vec<FileEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    /// Draw seed for this member.
    pub seed: u64,
}

impl Manifest {
    pub fn save(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(dir.join(MANIFEST_NAME), text)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_NAME);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn train_set(&self, dir: &Path) -> Result<TrainSet<f64>> {
        if self.train.is_empty() {
            return Err(Error::InvalidInput(format!(
                "dataset {} has no training members",
                dir.display()
            )));
        }
        TrainSet::new(self.load_files(dir, &self.train)?)
    }

    pub fn test_matrices(&self, dir: &Path) -> Result<Vec<DenseMatrix<f64>>> {
        self.load_files(dir, &self.test)
    }

    fn load_files(&self, dir: &Path, entries: &[FileEntry]) -> Result<Vec<DenseMatrix<f64>>> {
        entries
            .iter()
            .map(|entry| io::read_matrix(&dir.join(&entry.file)))
            .collect()
    }
}

pub fn member_path(dir: &Path, role: &str, index: usize) -> PathBuf {
    dir.join(format!("{role}_{index:03}.lskm"))
}
