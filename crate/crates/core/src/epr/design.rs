use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SVD};

use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::scalar::Real;

/// `H = [[I_n, X, L], [0, I_p, 0], [0, 0, I_r], [I_n, 0, 0]]`.
pub fn build_h<T: Real>(x: &DMatrix<T>, l: &DMatrix<T>) -> Result<DMatrix<T>> {
    let (n, p) = x.shape();
    if l.nrows() != n {
        return Err(Error::dim("loading matrix rows", n, l.nrows()));
    }
    let r = l.ncols();
    let mut h = DMatrix::zeros(2 * n + p + r, n + p + r);
    h.view_mut((0, 0), (n, n)).fill_with_identity();
    h.view_mut((0, n), (n, p)).copy_from(x);
    h.view_mut((0, n + p), (n, r)).copy_from(l);
    h.view_mut((n, n), (p, p)).fill_with_identity();
    h.view_mut((n + p, n + p), (r, r)).fill_with_identity();
    h.view_mut((n + p + r, 0), (n, n)).fill_with_identity();
    Ok(h)
}

fn full_rank_check<T: Real>(h: &DMatrix<T>) -> Result<()> {
    let s = singular_values(h);
    let k = h.ncols();
    if k == 0 || h.nrows() < k {
        return Err(Error::dim("H", "tall matrix", format!("{}x{}", h.nrows(), k)));
    }
    let tol = T::of(1e-10) * s[0];
    if !(s[k - 1] > tol) {
        return Err(Error::RankDeficient { sigma_min: s[k - 1].as_f64(), sigma_max: s[0].as_f64(), tol: tol.as_f64() });
    }
    Ok(())
}

/// Orthonormal basis of the null space of `H'` from a full Householder QR of `H`:
/// the trailing `m − k` columns of the complete orthogonal factor.
pub fn build_q<T: Real>(h: &DMatrix<T>) -> Result<DMatrix<T>> {
    full_rank_check(h)?;
    let (m, k) = h.shape();
    let qr = h.clone().qr();
    let mut qt = DMatrix::identity(m, m);
    qr.q_tr_mul(&mut qt);
    Ok(qt.transpose().columns(k, m - k).into_owned())
}

/// Dense reference route: `(H'H)^{-1}H'` via QR and `Q` via [`build_q`].
#[derive(Debug, Clone)]
pub struct DenseEpr<T: Real> {
    pub h: DMatrix<T>,
    pub pinv: DMatrix<T>,
    pub q: DMatrix<T>,
}

impl<T: Real> DenseEpr<T> {
    pub fn new(x: &DMatrix<T>, l: &DMatrix<T>) -> Result<Self> {
        let h = build_h(x, l)?;
        let q = build_q(&h)?;
        let qr = h.clone().qr();
        let pinv = qr
            .r()
            .solve_upper_triangular(&qr.q().transpose())
            .ok_or_else(|| Error::Unsupported("H is singular".into()))?;
        Ok(DenseEpr { h, pinv, q })
    }

    /// `((ξ, β, η), q)` for a stacked `w`.
    pub fn decompose(&self, w: &DVector<T>) -> (DVector<T>, DVector<T>) {
        (&self.pinv * w, self.q.transpose() * w)
    }
}

/// Structured form of the expanded design, never materializing `H` or `Q`.
///
/// With `M = [X L]`, `H'H = [[2I, M], [M', M'M + I]]`, so `(H'H)^{-1}H'w`
/// reduces to one `k x k` Cholesky solve (`k = p + r`). For `Q` we use
/// `N = [I; −X'; −L'; −I]`, whose columns span the null space of `H'`, and
/// `Q = N (N'N)^{-1/2}` with `N'N = 2I + MM'` diagonalized by the left singular
/// vectors of `M`. This `Q` is one particular orthonormal basis of that null
/// space; any other differs by an `n x n` rotation.
#[derive(Debug, Clone)]
pub struct EprDesign<T: Real> {
    x: DMatrix<T>,
    l: DMatrix<T>,
    m: DMatrix<T>,
    chol: Cholesky<T, Dyn>,
    u: DMatrix<T>,
    /// `(2 + s_j²)^{-1/2} − 2^{-1/2}` per left singular vector.
    shrink: DVector<T>,
}

impl<T: Real> EprDesign<T> {
    pub fn new(x: &DMatrix<T>, l: &DMatrix<T>) -> Result<Self> {
        let n = x.nrows();
        if l.nrows() != n {
            return Err(Error::dim("loading matrix rows", n, l.nrows()));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("EPR needs at least one observation".into()));
        }
        let (p, r) = (x.ncols(), l.ncols());
        let mut m = DMatrix::zeros(n, p + r);
        m.view_mut((0, 0), (n, p)).copy_from(x);
        m.view_mut((0, p), (n, r)).copy_from(l);
        let half = T::of(0.5);
        let s_mat = m.transpose() * &m * half + DMatrix::identity(p + r, p + r);
        let chol = s_mat.cholesky().ok_or_else(|| Error::Unsupported("M'M/2 + I is not positive definite".into()))?;
        let svd = SVD::new(m.clone(), true, false);
        let u = svd.u.expect("left singular vectors requested");
        let inv_sqrt2 = T::one() / T::of(2.0).sqrt();
        let shrink = svd.singular_values.map(|s| T::one() / (T::of(2.0) + s * s).sqrt() - inv_sqrt2);
        Ok(EprDesign { x: x.clone(), l: l.clone(), m, chol, u, shrink })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn r(&self) -> usize {
        self.l.ncols()
    }

    /// Length of the stacked `w = (y, w_β, w_η, w_ξ)`.
    pub fn stacked_len(&self) -> usize {
        2 * self.n() + self.p() + self.r()
    }

    pub fn x(&self) -> &DMatrix<T> {
        &self.x
    }

    pub fn l(&self) -> &DMatrix<T> {
        &self.l
    }

    fn split<'a>(&self, w: &'a DVector<T>) -> (nalgebra::DVectorView<'a, T>, nalgebra::DVectorView<'a, T>, nalgebra::DVectorView<'a, T>) {
        let (n, k) = (self.n(), self.p() + self.r());
        (w.rows(0, n), w.rows(n, k), w.rows(n + k, n))
    }

    /// `(ξ, (β, η)) = (H'H)^{-1}H'w`.
    pub fn solve(&self, w: &DVector<T>) -> (DVector<T>, DVector<T>) {
        let (y, wb, wx) = self.split(w);
        let half = T::of(0.5);
        let a = y + wx;
        let b = self.m.tr_mul(&y) + wb;
        let rhs = b - self.m.tr_mul(&a) * half;
        let theta = self.chol.solve(&rhs);
        let xi = (a - &self.m * &theta) * half;
        (xi, theta)
    }

    /// `(N'N)^{-1/2} v`.
    fn inv_sqrt_gram(&self, v: &DVector<T>) -> DVector<T> {
        let inv_sqrt2 = T::one() / T::of(2.0).sqrt();
        let c = self.u.tr_mul(v).component_mul(&self.shrink);
        &self.u * c + v * inv_sqrt2
    }

    /// `q = Q'w`.
    pub fn null_coords(&self, w: &DVector<T>) -> DVector<T> {
        let (y, wb, wx) = self.split(w);
        let nt = y - &self.m * wb - wx;
        self.inv_sqrt_gram(&nt)
    }

    /// `Q q` as a stacked vector.
    pub fn apply_q(&self, q: &DVector<T>) -> DVector<T> {
        let v = self.inv_sqrt_gram(q);
        let (n, k) = (self.n(), self.p() + self.r());
        let mut out = DVector::zeros(self.stacked_len());
        out.rows_mut(0, n).copy_from(&v);
        out.rows_mut(n, k).copy_from(&(-self.m.tr_mul(&v)));
        out.rows_mut(n + k, n).copy_from(&(-&v));
        out
    }

    /// First block of `Q q`, i.e. `−τ_y`.
    pub fn q_first_block(&self, q: &DVector<T>) -> DVector<T> {
        self.inv_sqrt_gram(q)
    }

    /// `H (ξ, β, η)` as a stacked vector.
    pub fn apply_h(&self, xi: &DVector<T>, theta: &DVector<T>) -> DVector<T> {
        let (n, k) = (self.n(), self.p() + self.r());
        let mut out = DVector::zeros(self.stacked_len());
        out.rows_mut(0, n).copy_from(&(xi + &self.m * theta));
        out.rows_mut(n, k).copy_from(theta);
        out.rows_mut(n + k, n).copy_from(xi);
        out
    }

    /// Materialized `Q` (for checks on small problems).
    pub fn q_matrix(&self) -> DMatrix<T> {
        let n = self.n();
        let cols: Vec<DVector<T>> = (0..n)
            .map(|j| {
                let mut e = DVector::zeros(n);
                e[j] = T::one();
                self.apply_q(&e)
            })
            .collect();
        DMatrix::from_columns(&cols)
    }
}
