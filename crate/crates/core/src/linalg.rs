//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tolerance below which eigenvalues are treated as zero.
pub const EIG_CLIP_REL: f64 = 1e-12;
/// Relative tolerance for accepting slightly negative eigenvalues as PSD.
pub const PSD_REL_TOL: f64 = 1e-10;

pub fn frobenius<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
}

pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
}

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::of(0.5)
}

/// Largest absolute asymmetry relative to the largest entry.
pub fn asymmetry<T: Real>(m: &DMatrix<T>) -> T {
    let scale = max_abs(m);
    if scale == T::zero() {
        return T::zero();
    }
    max_abs(&(m - m.transpose())) / scale
}

/// Symmetric eigendecomposition after explicit symmetrization.
pub fn sym_eigen<T: Real>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    (eig.eigenvalues, eig.eigenvectors)
}

/// Fails if `m` has an eigenvalue below `-PSD_REL_TOL * max|eig|`.
pub fn check_psd<T: Real>(name: &'static str, m: &DMatrix<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dim(name, "square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    if m.nrows() == 0 {
        return Ok(());
    }
    if asymmetry(m) > T::of(1e-8) {
        return Err(Error::InvalidParameter(format!("{name} is not symmetric")));
    }
    let (vals, _) = sym_eigen(m);
    let max_abs_eig = vals.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    let min_eig = vals.iter().fold(T::max_value().unwrap(), |a, &v| a.min(v));
    if min_eig < -T::of(PSD_REL_TOL) * max_abs_eig {
        return Err(Error::NotPsd {
            name,
            min_eig: min_eig.as_f64(),
            max_abs_eig: max_abs_eig.as_f64(),
        });
    }
    Ok(())
}

/// Factor `F` with `F F' = cov`, for drawing `N(0, cov)` as `F z`.
///
/// Tries Cholesky first and falls back to a clipped symmetric eigendecomposition
/// so that singular (or all-zero) covariances are accepted.
pub fn sampling_factor<T: Real>(name: &'static str, cov: &DMatrix<T>) -> Result<DMatrix<T>> {
    if let Some(chol) = cov.clone().cholesky() {
        return Ok(chol.l());
    }
    check_psd(name, cov)?;
    let (vals, vecs) = sym_eigen(cov);
    let max = vals.iter().fold(T::zero(), |a, &v| a.max(v));
    let floor = T::of(EIG_CLIP_REL) * max;
    let mut f = vecs;
    for (j, &lam) in vals.iter().enumerate() {
        let s = if lam > floor { lam.sqrt() } else { T::zero() };
        f.column_mut(j).scale_mut(s);
    }
    Ok(f)
}

/// Symmetric PSD square root `V diag(sqrt(max(lambda, 0))) V'` with eigenvalues
/// below `EIG_CLIP_REL * max` clipped to zero.
pub fn psd_sqrt<T: Real>(k: &DMatrix<T>) -> Result<DMatrix<T>> {
    if !k.is_square() {
        return Err(Error::dim("psd_sqrt", "square matrix", format!("{}x{}", k.nrows(), k.ncols())));
    }
    if asymmetry(k) > T::of(1e-8) {
        return Err(Error::InvalidParameter("psd_sqrt: input is not symmetric".into()));
    }
    let (vals, vecs) = sym_eigen(k);
    let max = vals.iter().fold(T::min_value().unwrap(), |a, &v| a.max(v));
    if max <= T::zero() {
        return Err(Error::CovarianceCollapsed(max.as_f64()));
    }
    let floor = T::of(EIG_CLIP_REL) * max;
    let mut scaled = vecs.clone();
    for (j, &lam) in vals.iter().enumerate() {
        let s = if lam > floor { lam.sqrt() } else { T::zero() };
        scaled.column_mut(j).scale_mut(s);
    }
    Ok(symmetrize(&(scaled * vecs.transpose())))
}

pub fn standard_normal<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<T> {
    DVector::from_fn(n, |_, _| T::of(rng.sample::<f64, _>(StandardNormal)))
}

/// Singular values of `m`, largest first.
pub fn singular_values<T: Real>(m: &DMatrix<T>) -> DVector<T> {
    let mut s = m.clone().singular_values();
    s.as_mut_slice().sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}
