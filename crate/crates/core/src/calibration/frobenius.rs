use nalgebra::DMatrix;

use super::ensemble::EnsembleCovariance;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, psd_sqrt, singular_values, symmetrize};
use crate::scalar::Real;

/// Relative singular-value floor for the full-column-rank check on `G`.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Low-rank calibration `GKG' ≈ Σ̂` and its loading matrix `L = G K^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedCovariance<T> {
    pub k: DMatrix<T>,
    pub k_sqrt: DMatrix<T>,
    pub l: DMatrix<T>,
    pub frobenius_residual: T,
}

/// Orthonormal basis `Q` of `col(G)` and `P = (G'G)^{-1} G' = R^{-1} Q'`.
struct Projector<T: Real> {
    q: DMatrix<T>,
    p: DMatrix<T>,
}

fn projector<T: Real>(g: &DMatrix<T>) -> Result<Projector<T>> {
    let (m, r) = g.shape();
    if r == 0 || m < r {
        return Err(Error::dim("basis matrix", "nT >= r >= 1", format!("{m}x{r}")));
    }
    let s = singular_values(g);
    let (smax, smin) = (s[0], s[r - 1]);
    let tol = T::of(RANK_REL_TOL) * smax;
    if !(smin > tol) {
        return Err(Error::RankDeficient { sigma_min: smin.as_f64(), sigma_max: smax.as_f64(), tol: tol.as_f64() });
    }
    let qr = g.clone().qr();
    let q = qr.q();
    let rmat = qr.r();
    let qt = q.transpose();
    let p = rmat
        .solve_upper_triangular(&qt)
        .ok_or_else(|| Error::RankDeficient { sigma_min: smin.as_f64(), sigma_max: smax.as_f64(), tol: tol.as_f64() })?;
    Ok(Projector { q, p })
}

/// `K = (G'G)^{-1} G' Σ̂ G (G'G)^{-1}`, the minimizer of `‖GKG' − Σ̂‖_F`.
///
/// Computed as `P Σ̂ P'` with `P = R^{-1} Q'` from a QR factorization of `G`;
/// `G` must have full column rank (smallest singular value above
/// `RANK_REL_TOL` times the largest).
pub fn frobenius_match<T: Real>(sigma_hat: &DMatrix<T>, g: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_sigma(sigma_hat, g)?;
    let pr = projector(g)?;
    Ok(symmetrize(&(&pr.p * sigma_hat * pr.p.transpose())))
}

/// Same minimizer from the centred replicates, without forming `Σ̂`:
/// `K = (P C)(P C)' / R`.
pub fn frobenius_match_factored<T: Real>(ens: &EnsembleCovariance<T>, g: &DMatrix<T>) -> Result<DMatrix<T>> {
    factored(ens, g).map(|(k, _)| k)
}

fn check_sigma<T: Real>(sigma_hat: &DMatrix<T>, g: &DMatrix<T>) -> Result<()> {
    let m = g.nrows();
    if sigma_hat.shape() != (m, m) {
        return Err(Error::dim("empirical covariance", format!("{m}x{m}"), format!("{}x{}", sigma_hat.nrows(), sigma_hat.ncols())));
    }
    Ok(())
}

fn factored<T: Real>(ens: &EnsembleCovariance<T>, g: &DMatrix<T>) -> Result<(DMatrix<T>, T)> {
    if ens.dim() != g.nrows() {
        return Err(Error::dim("ensemble dimension", g.nrows(), ens.dim()));
    }
    let pr = projector(g)?;
    let c = &ens.centered;
    let rr = T::of(ens.replicates() as f64);
    let pc = &pr.p * c;
    let k = symmetrize(&(&pc * pc.transpose() / rr));

    // Split C into its part in col(G) and the orthogonal remainder B. The
    // residual Σ̂ − GKG' is (AB' + BA' + BB')/R with mutually orthogonal terms,
    // so its squared norm is (2 tr(A'A B'B) + ‖B'B‖²) / R² without cancellation.
    let qtc = pr.q.transpose() * c;
    let b = c - &pr.q * &qtc;
    let ata = qtc.transpose() * &qtc;
    let btb = b.transpose() * &b;
    let cross = ata.component_mul(&btb).sum();
    let resid = (T::of(2.0) * cross + frobenius(&btb).powi(2)).max(T::zero()).sqrt() / rr;
    Ok((k, resid))
}

fn finish<T: Real>(k: DMatrix<T>, g: &DMatrix<T>, frobenius_residual: T) -> Result<CalibratedCovariance<T>> {
    let k_sqrt = psd_sqrt(&k)?;
    let l = g * &k_sqrt;
    Ok(CalibratedCovariance { k, k_sqrt, l, frobenius_residual })
}

/// Dense route: match, take the square root, and record `‖GKG' − Σ̂‖_F`.
pub fn calibrate<T: Real>(sigma_hat: &DMatrix<T>, g: &DMatrix<T>) -> Result<CalibratedCovariance<T>> {
    let k = frobenius_match(sigma_hat, g)?;
    let resid = frobenius(&(g * &k * g.transpose() - sigma_hat));
    finish(k, g, resid)
}

/// Factored route for large `nT`; agrees with [`calibrate`] on `ens.sigma_hat()`.
pub fn calibrate_ensemble<T: Real>(ens: &EnsembleCovariance<T>, g: &DMatrix<T>) -> Result<CalibratedCovariance<T>> {
    let (k, resid) = factored(ens, g)?;
    finish(k, g, resid)
}
