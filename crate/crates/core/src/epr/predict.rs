use nalgebra::{DMatrix, DVector};

use super::design::EprDesign;
use super::family::Family;
use super::sampler::PosteriorDraws;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rows to predict.
#[derive(Debug, Clone, Copy)]
pub enum PredictRows<'a, T: Real> {
    /// The fitted rows. With `include_xi` the prediction is the full
    /// `Xβ + Lη + ξ − τ_y`; without it, the smooth part `Xβ + Lη`.
    InSample { design: &'a EprDesign<T>, include_xi: bool },
    /// Held-out or forecast rows: `Xβ + Lη` only.
    OutOfSample { x: &'a DMatrix<T>, l: &'a DMatrix<T> },
}

/// Latent predictions, one column per replicate.
pub fn latent_predict<T: Real>(draws: &PosteriorDraws<T>, rows: PredictRows<'_, T>) -> Result<DMatrix<T>> {
    let (p, r) = (draws.beta.nrows(), draws.eta.nrows());
    let (x, l) = match rows {
        PredictRows::InSample { design, .. } => (design.x(), design.l()),
        PredictRows::OutOfSample { x, l } => (x, l),
    };
    if x.ncols() != p {
        return Err(Error::dim("prediction covariates", p, x.ncols()));
    }
    if l.ncols() != r {
        return Err(Error::dim("prediction basis columns", r, l.ncols()));
    }
    if l.nrows() != x.nrows() {
        return Err(Error::dim("prediction rows", x.nrows(), l.nrows()));
    }
    let mut out = x * &draws.beta + l * &draws.eta;
    if let PredictRows::InSample { design, include_xi: true } = rows {
        if draws.xi.nrows() != design.n() {
            return Err(Error::dim("draws vs design rows", design.n(), draws.xi.nrows()));
        }
        out += &draws.xi;
        for k in 0..draws.n_reps() {
            let neg_tau = design.q_first_block(&draws.q.column(k).into_owned());
            let mut col = out.column_mut(k);
            col += neg_tau;
        }
    }
    Ok(out)
}

/// Row means of a replicate matrix.
pub fn replicate_mean<T: Real>(m: &DMatrix<T>) -> DVector<T> {
    let k = T::of(m.ncols() as f64);
    m.column_sum() / k
}

/// Posterior mean of the data-scale mean `E[g^{-1}(y)]` per row.
pub fn response_mean<T: Real>(latent: &DMatrix<T>, family: Family) -> DVector<T> {
    let mapped = latent.map(|v| T::of(family.inverse_link(v.as_f64())));
    replicate_mean(&mapped)
}

/// Block-expands `x` for time-varying coefficients: a row at time index
/// `time_index[i]` places its covariates in block `time_index[i]` of `p·n_times` columns.
pub fn expand_time_varying<T: Real>(x: &DMatrix<T>, time_index: &[usize], n_times: usize) -> Result<DMatrix<T>> {
    if time_index.len() != x.nrows() {
        return Err(Error::dim("time index", x.nrows(), time_index.len()));
    }
    let p = x.ncols();
    let mut out = DMatrix::zeros(x.nrows(), p * n_times);
    for (i, &t) in time_index.iter().enumerate() {
        if t >= n_times {
            return Err(Error::Row { row: i, message: format!("time index {t} outside 0..{n_times}") });
        }
        out.view_mut((i, t * p), (1, p)).copy_from(&x.row(i));
    }
    Ok(out)
}
