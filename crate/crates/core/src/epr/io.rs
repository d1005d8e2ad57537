use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::family::Family;
use super::hyper::{Hyperprior, ThetaDraw};
use super::sampler::PosteriorDraws;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Block names in the long-format draws file. `theta` rows use index
/// 0..=3 for `sigma2_beta, sigma2_eta, sigma2_xi, sigma2_z` (the last only when sampled).
pub const BLOCKS: [&str; 6] = ["xi", "beta", "eta", "q", "y_rep", "theta"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawsManifest {
    pub seed: u64,
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub n_reps: usize,
    pub hyperprior: Hyperprior,
}

#[derive(Serialize, Deserialize)]
struct LongRow {
    replicate: usize,
    block: String,
    index: usize,
    value: f64,
}

impl<T: Real> PosteriorDraws<T> {
    /// Long format: `replicate, block, index, value`, replicate-major.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for k in 0..self.n_reps() {
            for (name, m) in [("xi", &self.xi), ("beta", &self.beta), ("eta", &self.eta), ("q", &self.q), ("y_rep", &self.y_rep)] {
                for (i, v) in m.column(k).iter().enumerate() {
                    out.serialize(LongRow { replicate: k, block: name.into(), index: i, value: v.as_f64() })?;
                }
            }
            let th = &self.theta[k];
            let vals = [Some(th.sigma2_beta), Some(th.sigma2_eta), Some(th.sigma2_xi), th.sigma2_z];
            for (i, v) in vals.iter().enumerate() {
                if let Some(v) = v {
                    out.serialize(LongRow { replicate: k, block: "theta".into(), index: i, value: *v })?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, manifest: &DrawsManifest) -> Result<Self> {
        let k = manifest.n_reps;
        let mut d = PosteriorDraws {
            xi: DMatrix::zeros(manifest.n, k),
            beta: DMatrix::zeros(manifest.p, k),
            eta: DMatrix::zeros(manifest.r, k),
            q: DMatrix::zeros(manifest.n, k),
            y_rep: DMatrix::zeros(manifest.n, k),
            theta: vec![ThetaDraw { sigma2_beta: f64::NAN, sigma2_eta: f64::NAN, sigma2_xi: f64::NAN, sigma2_z: None }; k],
        };
        let mut filled = 0usize;
        for (line, rec) in csv::Reader::from_reader(r).deserialize::<LongRow>().enumerate() {
            let row = rec?;
            let bad = |m: String| Error::Row { row: line, message: m };
            if row.replicate >= k {
                return Err(bad(format!("replicate {} >= {k}", row.replicate)));
            }
            let target = match row.block.as_str() {
                "xi" => &mut d.xi,
                "beta" => &mut d.beta,
                "eta" => &mut d.eta,
                "q" => &mut d.q,
                "y_rep" => &mut d.y_rep,
                "theta" => {
                    let th = &mut d.theta[row.replicate];
                    match row.index {
                        0 => th.sigma2_beta = row.value,
                        1 => th.sigma2_eta = row.value,
                        2 => th.sigma2_xi = row.value,
                        3 => th.sigma2_z = Some(row.value),
                        i => return Err(bad(format!("theta index {i} out of range"))),
                    }
                    continue;
                }
                other => return Err(bad(format!("unknown block {other:?}"))),
            };
            if row.index >= target.nrows() {
                return Err(bad(format!("index {} out of range for block {}", row.index, row.block)));
            }
            target[(row.index, row.replicate)] = T::of(row.value);
            filled += 1;
        }
        let expected = k * (3 * manifest.n + manifest.p + manifest.r);
        if filled != expected {
            return Err(Error::dim("draw entries", expected, filled));
        }
        Ok(d)
    }
}
