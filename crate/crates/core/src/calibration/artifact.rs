use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::frobenius::CalibratedCovariance;
use super::prior::GqnPrior;
use crate::error::Result;
use crate::scalar::Real;
use crate::table::{read_matrix_csv, sha256_hex, write_matrix_csv};

/// Describes a persisted calibration (`K.csv`, `K_sqrt.csv`, `L.csv`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationManifest {
    pub n_rows: usize,
    pub r: usize,
    pub replicates: usize,
    pub seed: u64,
    pub prior_sha256: String,
    pub prior: GqnPrior,
    pub frobenius_residual: f64,
}

impl CalibrationManifest {
    pub fn new<T: Real>(cal: &CalibratedCovariance<T>, prior: &GqnPrior, replicates: usize, seed: u64) -> Result<Self> {
        let prior_json = serde_json::to_vec(prior)?;
        Ok(CalibrationManifest {
            n_rows: cal.l.nrows(),
            r: cal.k.nrows(),
            replicates,
            seed,
            prior_sha256: sha256_hex(&prior_json),
            prior: prior.clone(),
            frobenius_residual: cal.frobenius_residual.as_f64(),
        })
    }
}

pub fn write_calibration<T: Real>(dir: &Path, cal: &CalibratedCovariance<T>, manifest: &CalibrationManifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_matrix_csv(&cal.k, BufWriter::new(File::create(dir.join("K.csv"))?))?;
    write_matrix_csv(&cal.k_sqrt, BufWriter::new(File::create(dir.join("K_sqrt.csv"))?))?;
    write_matrix_csv(&cal.l, BufWriter::new(File::create(dir.join("L.csv"))?))?;
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(dir.join("calibration.json"), text)?;
    Ok(())
}

pub fn read_calibration<T: Real>(dir: &Path) -> Result<(CalibratedCovariance<T>, CalibrationManifest)> {
    let manifest: CalibrationManifest = serde_json::from_reader(File::open(dir.join("calibration.json"))?)?;
    let cal = CalibratedCovariance {
        k: read_matrix_csv(File::open(dir.join("K.csv"))?)?,
        k_sqrt: read_matrix_csv(File::open(dir.join("K_sqrt.csv"))?)?,
        l: read_matrix_csv(File::open(dir.join("L.csv"))?)?,
        frobenius_residual: T::of(manifest.frobenius_residual),
    };
    Ok((cal, manifest))
}
