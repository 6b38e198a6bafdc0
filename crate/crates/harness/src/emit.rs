//! Result emission: manifest.json, results.csv and binary field dumps.
//!
//! Reproducibility contract: the CSV contains no timestamps and every row
//! is produced in a deterministic order, so identical config + seed gives
//! bit-identical results.csv; wall-clock metadata lives in the manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

use oddnls_core::field::Field;

use crate::config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// SHA-256 of the grid descriptor and sampled abscissas.
pub fn grid_checksum(grid: &oddnls_core::Grid) -> String {
    let mut hasher = Sha256::new();
    hasher.update(grid.n_points().to_le_bytes());
    hasher.update(grid.half_length().to_le_bytes());
    for x in grid.points() {
        hasher.update(x.to_le_bytes());
    }
    hex_digest(hasher)
}

/// SHA-256 of a field's sample bytes (little-endian interleaved re/im).
pub fn field_checksum(field: &Field) -> String {
    let mut hasher = Sha256::new();
    for v in field.values() {
        hasher.update(v.re.to_le_bytes());
        hasher.update(v.im.to_le_bytes());
    }
    hex_digest(hasher)
}

fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub library_version: &'static str,
    pub schema_version: u32,
    pub experiment: &'a str,
    pub config: &'a ExperimentConfig,
    pub seed: u64,
    pub grid_checksum: String,
    pub initial_field_checksum: Option<String>,
    /// Quadrature values of the ground-state norms and sharp constants at
    /// the configured `(p, omega)`.
    pub ground_state: oddnls_core::soliton::SolitonNorms,
    /// Trajectory termination for evolution experiments.
    pub termination: Option<String>,
    pub threads: usize,
    /// Wall-clock stamp; excluded from the determinism contract.
    pub completed_unix_ms: u128,
    pub passed: bool,
    pub notes: Vec<String>,
}

pub struct RunArtifacts {
    pub dir: PathBuf,
}

impl RunArtifacts {
    pub fn create(dir: &Path) -> Result<Self, EmitError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<(), EmitError> {
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(manifest)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// RFC 4180 CSV with a header row.
    pub fn write_results_csv(
        &self,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), EmitError> {
        self.write_named_csv("results.csv", header, rows)
    }

    pub fn write_named_csv(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), EmitError> {
        let path = self.dir.join(name);
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Flat binary field dump: header `(n_points: u64, half_length: f64,
    /// time: f64)` followed by interleaved re/im doubles, all little-endian.
    pub fn dump_field(&self, name: &str, field: &Field, time: f64) -> Result<(), EmitError> {
        let path = self.dir.join(name);
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(&(field.grid().n_points() as u64).to_le_bytes())?;
        file.write_all(&field.grid().half_length().to_le_bytes())?;
        file.write_all(&time.to_le_bytes())?;
        for v in field.values() {
            file.write_all(&v.re.to_le_bytes())?;
            file.write_all(&v.im.to_le_bytes())?;
        }
        file.flush()?;
        Ok(())
    }
}

/// Read back a binary field dump (used by tests and downstream tooling).
pub fn read_field_dump(path: &Path) -> Result<(Field, f64), EmitError> {
    let bytes = std::fs::read(path)?;
    let mut at = 0usize;
    let mut take = |n: usize| {
        let s = &bytes[at..at + n];
        at += n;
        s
    };
    let n_points = u64::from_le_bytes(take(8).try_into().unwrap()) as usize;
    let half_length = f64::from_le_bytes(take(8).try_into().unwrap());
    let time = f64::from_le_bytes(take(8).try_into().unwrap());
    let grid = oddnls_core::Grid::new(n_points, half_length)
        .map_err(|e| EmitError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())))?;
    let mut values = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let re = f64::from_le_bytes(take(8).try_into().unwrap());
        let im = f64::from_le_bytes(take(8).try_into().unwrap());
        values.push(num_complex::Complex64::new(re, im));
    }
    let field = Field::new(grid, values)
        .map_err(|e| EmitError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())))?;
    Ok((field, time))
}

pub fn now_unix_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Deterministic float formatting for CSV cells: shortest roundtrip form.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}
