//! TOML form of [`DynamicsSpec`] and long-format CSV for [`FieldSeries`].

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::domain::SpatialDomain;
use super::simulate::FieldSeries;
use super::sparse::{QuadraticTensor, SparseMatrix};
use super::spec::{DynamicsSpec, Reaction};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Matrix written either densely (list of rows), as `[i, j, value]` triplets,
/// or as a diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixToml {
    Dense { dense: Vec<Vec<f64>> },
    Triplets { triplets: Vec<(usize, usize, f64)> },
    Diagonal { diagonal: Vec<f64> },
}

impl MatrixToml {
    fn to_dense<T: Real>(&self, name: &'static str, n: usize) -> Result<DMatrix<T>> {
        match self {
            MatrixToml::Dense { dense } => {
                if dense.len() != n || dense.iter().any(|r| r.len() != n) {
                    return Err(Error::dim(name, format!("{n}x{n} rows"), format!("{} rows", dense.len())));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| T::of(dense[i][j])))
            }
            MatrixToml::Triplets { triplets } => {
                Ok(SparseMatrix::from_triplets(n, n, triplets.iter().map(|&(i, j, v)| (i, j, T::of(v))))?.to_dense())
            }
            MatrixToml::Diagonal { diagonal } => {
                if diagonal.len() != n {
                    return Err(Error::dim(name, n, diagonal.len()));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| if i == j { T::of(diagonal[i]) } else { T::zero() }))
            }
        }
    }

    fn to_sparse<T: Real>(&self, name: &'static str, n: usize) -> Result<SparseMatrix<T>> {
        match self {
            MatrixToml::Triplets { triplets } => SparseMatrix::from_triplets(n, n, triplets.iter().map(|&(i, j, v)| (i, j, T::of(v)))),
            other => Ok(SparseMatrix::from_dense(&other.to_dense(name, n)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TensorToml {
    /// `[i, k, l, value]` entries.
    #[serde(default)]
    pub entries: Vec<(usize, usize, usize, f64)>,
}

/// Serializable mirror of [`DynamicsSpec`], usable as a section of a larger TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsSpecToml {
    pub n: usize,
    #[serde(default = "one")]
    pub dt: f64,
    pub reaction: Reaction<f64>,
    pub a: MatrixToml,
    #[serde(default)]
    pub b: TensorToml,
    pub sigma_eta: MatrixToml,
    pub sigma_0: MatrixToml,
}

fn one() -> f64 {
    1.0
}

fn dense_rows<T: Real>(m: &DMatrix<T>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().map(|v| v.as_f64()).collect()).collect()
}

impl DynamicsSpecToml {
    pub fn from_spec<T: Real>(spec: &DynamicsSpec<T>) -> Self {
        DynamicsSpecToml {
            n: spec.n(),
            dt: spec.dt.as_f64(),
            reaction: Reaction { kind: spec.reaction.kind, gamma0: spec.reaction.gamma0.as_f64(), gamma1: spec.reaction.gamma1.as_f64() },
            a: MatrixToml::Triplets { triplets: spec.a.triplets().map(|(i, j, v)| (i, j, v.as_f64())).collect() },
            b: TensorToml { entries: spec.b.entries().map(|(i, k, l, v)| (i, k, l, v.as_f64())).collect() },
            sigma_eta: MatrixToml::Dense { dense: dense_rows(&spec.sigma_eta) },
            sigma_0: MatrixToml::Dense { dense: dense_rows(&spec.sigma_0) },
        }
    }

    /// Converts and validates.
    pub fn into_spec<T: Real>(&self) -> Result<DynamicsSpec<T>> {
        let n = self.n;
        let spec = DynamicsSpec {
            a: self.a.to_sparse("a", n)?,
            b: QuadraticTensor::from_entries(n, self.b.entries.iter().map(|&(i, k, l, v)| (i, k, l, T::of(v))))?,
            reaction: Reaction { kind: self.reaction.kind, gamma0: T::of(self.reaction.gamma0), gamma1: T::of(self.reaction.gamma1) },
            sigma_eta: self.sigma_eta.to_dense("sigma_eta", n)?,
            sigma_0: self.sigma_0.to_dense("sigma_0", n)?,
            dt: T::of(self.dt),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl<T: Real> DynamicsSpec<T> {
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&DynamicsSpecToml::from_spec(self)).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let repr: DynamicsSpecToml = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        repr.into_spec()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRecord {
    site_id: String,
    time: i64,
    value: f64,
}

impl<T: Real> FieldSeries<T> {
    /// Writes `site_id,time,value` rows, time-major.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let ids = self.domain.site_ids();
        for (c, &time) in self.times.iter().enumerate() {
            for (i, id) in ids.iter().enumerate() {
                wtr.serialize(FieldRecord { site_id: id.clone(), time, value: self.values[(i, c)].as_f64() })?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a long-format CSV onto `domain`. Every (site, time) pair must appear exactly once.
    pub fn read_csv<R: Read>(r: R, domain: &SpatialDomain<T>) -> Result<Self> {
        let ids: HashMap<String, usize> = domain.site_ids().into_iter().enumerate().map(|(i, id)| (id, i)).collect();
        let records: Vec<FieldRecord> = csv::Reader::from_reader(r).deserialize().collect::<std::result::Result<_, _>>()?;
        let times: Vec<i64> = records.iter().map(|r| r.time).collect::<BTreeSet<_>>().into_iter().collect();
        let col: HashMap<i64, usize> = times.iter().enumerate().map(|(c, &t)| (t, c)).collect();
        let n = domain.n();
        let mut values = DMatrix::from_element(n, times.len(), T::zero());
        let mut seen = vec![false; n * times.len()];
        for (row, rec) in records.iter().enumerate() {
            let i = *ids.get(&rec.site_id).ok_or_else(|| Error::Row { row, message: format!("unknown site id {:?}", rec.site_id) })?;
            let c = col[&rec.time];
            if std::mem::replace(&mut seen[c * n + i], true) {
                return Err(Error::Row { row, message: format!("duplicate entry for site {:?} at time {}", rec.site_id, rec.time) });
            }
            values[(i, c)] = T::of(rec.value);
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Parse(format!("missing value for site index {} at time {}", k % n, times[k / n])));
        }
        FieldSeries::new(values, domain.clone(), times)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn spec_toml_round_trip() {
        let d = SpatialDomain::<f64>::lattice(3, 3, [1.0, 1.0]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let spec = crate::dynamics::NeighbourhoodScenario::gaussian_study().build(&d, &mut rng).unwrap();
        let s = spec.to_toml_string().unwrap();
        let back = DynamicsSpec::<f64>::from_toml_str(&s).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn spec_toml_dense_and_diagonal_forms() {
        let s = r#"
            n = 2
            [reaction]
            kind = "identity"
            gamma0 = 0.1
            gamma1 = 5.0
            [a]
            dense = [[0.5, 0.1], [0.0, 0.2]]
            [b]
            entries = [[0, 0, 0, -0.02]]
            [sigma_eta]
            diagonal = [1.0, 1.0]
            [sigma_0]
            triplets = [[0, 0, 2.0], [1, 1, 2.0]]
        "#;
        let spec = DynamicsSpec::<f64>::from_toml_str(s).unwrap();
        assert_eq!(spec.a.nnz(), 3);
        assert_eq!(spec.sigma_0[(1, 1)], 2.0);
        assert_eq!(spec.dt, 1.0);
    }

    #[test]
    fn field_csv_round_trip() {
        let d = SpatialDomain::<f64>::lattice(2, 2, [1.0, 1.0]).unwrap();
        let f = FieldSeries::new(DMatrix::from_fn(4, 3, |i, j| i as f64 * 0.1 - j as f64 / 3.0), d.clone(), vec![1, 2, 3]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("site_id,time,value\n0,1,"));
        let back = FieldSeries::read_csv(buf.as_slice(), &d).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn field_csv_missing_entry_rejected() {
        let d = SpatialDomain::<f64>::lattice(1, 2, [1.0, 1.0]).unwrap();
        let csv = "site_id,time,value\n0,1,0.5\n";
        assert!(FieldSeries::read_csv(csv.as_bytes(), &d).is_err());
    }
}
