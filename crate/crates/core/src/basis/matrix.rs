use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bisquare::bisquare_from_d2;
use super::knots::KnotGrid;
use crate::dynamics::SpatialDomain;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::{purpose, stream};
use crate::scalar::Real;

/// Default Monte-Carlo sample count per areal unit.
pub const DEFAULT_N_MC: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowLabel {
    pub site_id: String,
    pub time: i64,
}

/// Basis evaluations: one row per (site, time), one column per knot pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix<T> {
    pub g: DMatrix<T>,
    pub rows: Vec<RowLabel>,
    pub grid: KnotGrid<T>,
    /// Rows with no positive entry.
    pub flagged: Vec<usize>,
    pub warnings: Vec<String>,
}

impl<T: Real> BasisMatrix<T> {
    pub fn nrows(&self) -> usize {
        self.g.nrows()
    }

    pub fn r(&self) -> usize {
        self.g.ncols()
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> DMatrix<T> {
        self.g.select_rows(idx)
    }
}

/// Evaluates the basis at every `(site, time)` pair, time-major: row
/// `k * n + i` is site `i` at `times[k]`.
///
/// Point and lattice domains evaluate the bisquare at site coordinates;
/// areal domains average it over `n_mc` uniform points per unit. Each unit's
/// points are drawn once from its own seeded stream and reused for every knot
/// and time.
pub fn build_basis_matrix<T: Real>(domain: &SpatialDomain<T>, times: &[i64], grid: &KnotGrid<T>, n_mc: usize, seed: u64) -> Result<BasisMatrix<T>> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("basis needs at least one time".into()));
    }
    let n = domain.n();
    let mut warnings = Vec::new();
    for &t in times {
        if !grid.covers_time(T::of(t as f64)) {
            warnings.push(format!("time {t} lies outside the temporal knot range; its rows may be all zero"));
        }
    }

    // Per-site point sets, already mapped into knot coordinates (time added later).
    let sites: Vec<Vec<Point<T>>> = match domain {
        SpatialDomain::Areal { units } => {
            if n_mc == 0 {
                return Err(Error::InvalidParameter("n_mc must be >= 1".into()));
            }
            units
                .par_iter()
                .enumerate()
                .map(|(i, u)| {
                    let mut rng = stream(seed, purpose::POLYGON, i as u64);
                    let pts = u.sample_uniform(n_mc, &mut rng)?;
                    Ok(pts.into_iter().map(|p| grid.to_unit(p, T::zero()).0).collect())
                })
                .collect::<Result<_>>()?
        }
        _ => domain.coords().into_iter().map(|p| vec![grid.to_unit(p, T::zero()).0]).collect(),
    };

    let ts: Vec<T> = times.iter().map(|&t| grid.to_unit([T::zero(); 2], T::of(t as f64)).1).collect();
    let (r_s, r_t, r) = (grid.r_s(), grid.r_t(), grid.r());
    let gamma = grid.bandwidth;
    let g2 = gamma * gamma;

    // For each site: row block of shape (times x r).
    let blocks: Vec<DMatrix<T>> = sites
        .par_iter()
        .map(|pts| {
            let mut block = DMatrix::zeros(ts.len(), r);
            let inv = T::one() / T::of(pts.len() as f64);
            for p in pts {
                for (js, c) in grid.spatial.iter().enumerate() {
                    let ds2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
                    if ds2 > g2 {
                        continue;
                    }
                    for (k, &t) in ts.iter().enumerate() {
                        for (jt, &pk) in grid.temporal.iter().enumerate() {
                            let v = bisquare_from_d2(ds2 + (t - pk).powi(2), gamma);
                            if v > T::zero() {
                                block[(k, js * r_t + jt)] += v * inv;
                            }
                        }
                    }
                }
            }
            block
        })
        .collect();
    debug_assert_eq!(r, r_s * r_t);

    let mut g = DMatrix::zeros(n * ts.len(), r);
    for (i, block) in blocks.iter().enumerate() {
        for k in 0..ts.len() {
            g.row_mut(k * n + i).copy_from(&block.row(k));
        }
    }
    let ids = domain.site_ids();
    let rows: Vec<RowLabel> = times
        .iter()
        .flat_map(|&t| ids.iter().map(move |id| RowLabel { site_id: id.clone(), time: t }))
        .collect();
    let flagged: Vec<usize> = (0..g.nrows()).filter(|&i| g.row(i).iter().all(|&v| v <= T::zero())).collect();
    if !flagged.is_empty() {
        warnings.push(format!("{} row(s) have no positive basis entry", flagged.len()));
    }
    Ok(BasisMatrix { g, rows, grid: grid.clone(), flagged, warnings })
}
