//! Plain numeric CSV tables and content hashing shared by the artifact writers.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Writes a matrix with header `c0,...,c{m-1}`. Values use Rust's shortest
/// round-trip formatting, so a read gives back identical `f64`s.
pub fn write_matrix_csv<T: Real, W: Write>(m: &DMatrix<T>, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record((0..m.ncols()).map(|j| format!("c{j}")))?;
    for row in m.row_iter() {
        wtr.write_record(row.iter().map(|v| v.as_f64().to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_matrix_csv<T: Real, R: Read>(r: R) -> Result<DMatrix<T>> {
    let mut rdr = csv::Reader::from_reader(r);
    let ncols = rdr.headers()?.len();
    let mut data = Vec::new();
    let mut nrows = 0;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for f in rec.iter() {
            data.push(T::of(f.parse::<f64>().map_err(|e| Error::Row { row, message: e.to_string() })?));
        }
        nrows += 1;
    }
    Ok(DMatrix::from_row_slice(nrows, ncols, &data))
}

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
