//! Sparse storage for the transition matrix and the quadratic interaction tensor.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Compressed-row sparse matrix. Only declared entries are stored and visited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, T::one()))).expect("diagonal triplets are valid")
    }

    /// Builds from `(row, col, value)` triplets. Duplicate coordinates are an error;
    /// explicit zeros are kept as declared entries.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut t: Vec<(usize, usize, T)> = triplets.into_iter().collect();
        for &(i, j, _) in &t {
            if i >= nrows || j >= ncols {
                return Err(Error::dim("sparse triplet", format!("index < {nrows}x{ncols}"), format!("({i}, {j})")));
            }
        }
        t.sort_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = t.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidParameter(format!("duplicate sparse entry ({}, {})", w[0].0, w[0].1)));
        }
        let mut row_ptr = vec![0; nrows + 1];
        for &(i, _, _) in &t {
            row_ptr[i + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx: t.iter().map(|e| e.1).collect(),
            values: t.iter().map(|e| e.2).collect(),
        })
    }

    /// Keeps the nonzero entries of a dense matrix.
    pub fn from_dense(m: &DMatrix<T>) -> Self {
        let trip = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).filter_map(|(i, j)| {
            let v = m[(i, j)];
            (v != T::zero()).then_some((i, j, v))
        });
        Self::from_triplets(m.nrows(), m.ncols(), trip).expect("dense indices are unique and in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(col, value)` pairs of row `i` in column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `(A x)_i` summed over stored entries of row `i` in column order.
    #[inline]
    pub fn row_dot(&self, i: usize, x: &DVector<T>) -> T {
        self.row(i).fold(T::zero(), |acc, (j, v)| acc + v * x[j])
    }

    pub fn mul_vec(&self, x: &DVector<T>) -> DVector<T> {
        DVector::from_fn(self.nrows, |i, _| self.row_dot(i, x))
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }
}

/// Sparse rank-3 tensor `b[i, k, l]`, grouped by output index `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTensor<T> {
    n: usize,
    row_ptr: Vec<usize>,
    kl: Vec<(usize, usize)>,
    values: Vec<T>,
}

impl<T: Real> QuadraticTensor<T> {
    pub fn empty(n: usize) -> Self {
        QuadraticTensor { n, row_ptr: vec![0; n + 1], kl: vec![], values: vec![] }
    }

    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize, usize, T)>) -> Result<Self> {
        let mut e: Vec<(usize, usize, usize, T)> = entries.into_iter().collect();
        for &(i, k, l, _) in &e {
            if i >= n || k >= n || l >= n {
                return Err(Error::dim("quadratic tensor entry", format!("indices < {n}"), format!("({i}, {k}, {l})")));
            }
        }
        e.sort_by_key(|&(i, k, l, _)| (i, k, l));
        if let Some(w) = e.windows(2).find(|w| (w[0].0, w[0].1, w[0].2) == (w[1].0, w[1].1, w[1].2)) {
            return Err(Error::InvalidParameter(format!("duplicate tensor entry ({}, {}, {})", w[0].0, w[0].1, w[0].2)));
        }
        let mut row_ptr = vec![0; n + 1];
        for &(i, ..) in &e {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(QuadraticTensor {
            n,
            row_ptr,
            kl: e.iter().map(|x| (x.1, x.2)).collect(),
            values: e.iter().map(|x| x.3).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.kl[r.clone()].iter().zip(self.values[r].iter()).map(|(&(k, l), &v)| (k, l, v))
    }

    pub fn row_is_empty(&self, i: usize) -> bool {
        self.row_ptr[i] == self.row_ptr[i + 1]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(k, l, v)| (i, k, l, v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_matches_dense_product() {
        let d = DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.1, 0.0, 0.2, 0.0, 1.0, 0.0, 0.0]);
        let s = SparseMatrix::from_dense(&d);
        assert_eq!(s.nnz(), 4);
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(s.mul_vec(&x), &d * &x);
        assert_eq!(s.to_dense(), d);
    }

    #[test]
    fn duplicates_and_out_of_range_rejected() {
        assert!(SparseMatrix::<f64>::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0)]).is_err());
        assert!(SparseMatrix::<f64>::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(QuadraticTensor::<f64>::from_entries(2, vec![(0, 0, 0, 1.0), (0, 0, 0, 1.0)]).is_err());
        assert!(QuadraticTensor::<f64>::from_entries(2, vec![(0, 3, 0, 1.0)]).is_err());
    }

    #[test]
    fn tensor_rows_grouped() {
        let b = QuadraticTensor::from_entries(3, vec![(2, 0, 1, 1.0), (0, 0, 0, 2.0), (2, 1, 1, 3.0)]).unwrap();
        assert_eq!(b.row(2).count(), 2);
        assert!(b.row_is_empty(1));
        assert_eq!(b.entries().next(), Some((0, 0, 0, 2.0)));
    }
}
