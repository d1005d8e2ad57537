use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{AreaUnit, Point};
use crate::scalar::Real;

/// The set of spatial sites (or areal units) a field lives on.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialDomain<T> {
    /// Regular grid. Site `i` sits at row `i / cols`, column `i % cols`, with
    /// coordinates `(col * spacing[0], row * spacing[1])`; `s1` runs along columns.
    Lattice {
        rows: usize,
        cols: usize,
        spacing: [T; 2],
    },
    PointSet {
        ids: Vec<String>,
        coords: Vec<Point<T>>,
    },
    Areal {
        units: Vec<AreaUnit<T>>,
    },
}

impl<T: Real> SpatialDomain<T> {
    pub fn lattice(rows: usize, cols: usize, spacing: [T; 2]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("lattice needs rows, cols >= 1".into()));
        }
        if !(spacing[0] > T::zero() && spacing[1] > T::zero()) {
            return Err(Error::InvalidParameter("lattice spacing must be positive".into()));
        }
        Ok(SpatialDomain::Lattice { rows, cols, spacing })
    }

    pub fn points(ids: Vec<String>, coords: Vec<Point<T>>) -> Result<Self> {
        if coords.is_empty() || ids.len() != coords.len() {
            return Err(Error::dim("point domain", "ids.len() == coords.len() >= 1", format!("{} ids, {} coords", ids.len(), coords.len())));
        }
        Ok(SpatialDomain::PointSet { ids, coords })
    }

    pub fn areal(units: Vec<AreaUnit<T>>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::InvalidParameter("areal domain needs at least one unit".into()));
        }
        Ok(SpatialDomain::Areal { units })
    }

    pub fn n(&self) -> usize {
        match self {
            SpatialDomain::Lattice { rows, cols, .. } => rows * cols,
            SpatialDomain::PointSet { coords, .. } => coords.len(),
            SpatialDomain::Areal { units } => units.len(),
        }
    }

    pub fn site_ids(&self) -> Vec<String> {
        match self {
            SpatialDomain::Lattice { .. } => (0..self.n()).map(|i| i.to_string()).collect(),
            SpatialDomain::PointSet { ids, .. } => ids.clone(),
            SpatialDomain::Areal { units } => units.iter().map(|u| u.id.clone()).collect(),
        }
    }

    /// Representative coordinates per site; areal units use their centroids.
    pub fn coords(&self) -> Vec<Point<T>> {
        match self {
            SpatialDomain::Lattice { cols, spacing, .. } => (0..self.n())
                .map(|i| [T::of((i % cols) as f64) * spacing[0], T::of((i / cols) as f64) * spacing[1]])
                .collect(),
            SpatialDomain::PointSet { coords, .. } => coords.clone(),
            SpatialDomain::Areal { units } => units.iter().map(AreaUnit::centroid).collect(),
        }
    }

    /// Pairwise Euclidean distances between site coordinates.
    pub fn distances(&self) -> DMatrix<T> {
        let c = self.coords();
        let n = c.len();
        DMatrix::from_fn(n, n, |i, j| ((c[i][0] - c[j][0]).powi(2) + (c[i][1] - c[j][1]).powi(2)).sqrt())
    }

    /// Bounding box of the site coordinates (areal: of all polygon vertices).
    pub fn bounds(&self) -> (Point<T>, Point<T>) {
        let mut lo = [T::max_value().unwrap(); 2];
        let mut hi = [T::min_value().unwrap(); 2];
        let mut push = |p: Point<T>| {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        };
        match self {
            SpatialDomain::Areal { units } => {
                for u in units {
                    let (a, b) = u.bbox();
                    push(a);
                    push(b);
                }
            }
            _ => self.coords().into_iter().for_each(&mut push),
        }
        (lo, hi)
    }
}
