//! Dense CSV plus JSON sidecar for [`BasisMatrix`].

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::knots::KnotGrid;
use super::matrix::{BasisMatrix, RowLabel};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Knot metadata stored next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSidecar {
    pub nrows: usize,
    pub r_s: usize,
    pub r_t: usize,
    /// Always "spatial_major": column `js * r_t + jt`.
    pub column_order: String,
    pub grid: KnotGrid<f64>,
    pub flagged_rows: Vec<usize>,
    pub warnings: Vec<String>,
}

fn grid_to_f64<T: Real>(g: &KnotGrid<T>) -> KnotGrid<f64> {
    let p = |p: [T; 2]| [p[0].as_f64(), p[1].as_f64()];
    KnotGrid {
        spatial: g.spatial.iter().map(|&s| p(s)).collect(),
        temporal: g.temporal.iter().map(|t| t.as_f64()).collect(),
        bandwidth: g.bandwidth.as_f64(),
        standardize: g.standardize,
        space_bounds: (p(g.space_bounds.0), p(g.space_bounds.1)),
        time_bounds: (g.time_bounds.0.as_f64(), g.time_bounds.1.as_f64()),
    }
}

fn grid_from_f64<T: Real>(g: &KnotGrid<f64>) -> KnotGrid<T> {
    let p = |p: [f64; 2]| [T::of(p[0]), T::of(p[1])];
    KnotGrid {
        spatial: g.spatial.iter().map(|&s| p(s)).collect(),
        temporal: g.temporal.iter().map(|&t| T::of(t)).collect(),
        bandwidth: T::of(g.bandwidth),
        standardize: g.standardize,
        space_bounds: (p(g.space_bounds.0), p(g.space_bounds.1)),
        time_bounds: (T::of(g.time_bounds.0), T::of(g.time_bounds.1)),
    }
}

impl<T: Real> BasisMatrix<T> {
    pub fn sidecar(&self) -> BasisSidecar {
        BasisSidecar {
            nrows: self.nrows(),
            r_s: self.grid.r_s(),
            r_t: self.grid.r_t(),
            column_order: "spatial_major".into(),
            grid: grid_to_f64(&self.grid),
            flagged_rows: self.flagged.clone(),
            warnings: self.warnings.clone(),
        }
    }

    /// Writes `site_id,time,g0,...,g{r-1}` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["site_id".to_string(), "time".to_string()];
        header.extend((0..self.r()).map(|j| format!("g{j}")));
        wtr.write_record(&header)?;
        for (i, label) in self.rows.iter().enumerate() {
            let mut rec = vec![label.site_id.clone(), label.time.to_string()];
            rec.extend(self.g.row(i).iter().map(|v| v.as_f64().to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_sidecar<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.sidecar())?;
        Ok(())
    }

    pub fn read<R1: Read, R2: Read>(csv_in: R1, sidecar_in: R2) -> Result<Self> {
        let side: BasisSidecar = serde_json::from_reader(sidecar_in)?;
        let r = side.r_s * side.r_t;
        let mut rdr = csv::Reader::from_reader(csv_in);
        let mut rows = Vec::new();
        let mut data = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != r + 2 {
                return Err(Error::Row { row, message: format!("expected {} fields, found {}", r + 2, rec.len()) });
            }
            let time = rec[1].parse::<i64>().map_err(|e| Error::Row { row, message: e.to_string() })?;
            rows.push(RowLabel { site_id: rec[0].to_string(), time });
            for f in rec.iter().skip(2) {
                data.push(T::of(f.parse::<f64>().map_err(|e| Error::Row { row, message: e.to_string() })?));
            }
        }
        if rows.len() != side.nrows {
            return Err(Error::dim("basis csv rows", side.nrows, rows.len()));
        }
        Ok(BasisMatrix {
            g: DMatrix::from_row_slice(rows.len(), r, &data),
            rows,
            grid: grid_from_f64(&side.grid),
            flagged: side.flagged_rows,
            warnings: side.warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis_matrix;
    use crate::dynamics::SpatialDomain;

    #[test]
    fn csv_sidecar_round_trip() {
        let d = SpatialDomain::<f64>::lattice(3, 4, [1.0, 1.0]).unwrap();
        let (lo, hi) = d.bounds();
        let grid = KnotGrid::regular(5, 3, (lo, hi), (1.0, 3.0), None, true).unwrap();
        let b = build_basis_matrix(&d, &[1, 2, 3], &grid, 1, 0).unwrap();
        let (mut c, mut s) = (Vec::new(), Vec::new());
        b.write_csv(&mut c).unwrap();
        b.write_sidecar(&mut s).unwrap();
        let back = BasisMatrix::<f64>::read(c.as_slice(), s.as_slice()).unwrap();
        assert_eq!(back, b);
    }
}
