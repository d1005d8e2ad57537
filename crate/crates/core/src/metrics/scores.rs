use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

fn same_len(context: &'static str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::dim(context, a, b));
    }
    Ok(())
}

/// Mean squared difference.
pub fn mspe<T: Real>(pred: &[T], truth: &[T]) -> Result<T> {
    same_len("mspe inputs", pred.len(), truth.len())?;
    if pred.is_empty() {
        return Err(Error::InvalidParameter("mspe needs at least one row".into()));
    }
    let s = pred.iter().zip(truth).fold(T::zero(), |acc, (&p, &t)| acc + (p - t) * (p - t));
    Ok(s / T::of(pred.len() as f64))
}

/// `pred − truth` elementwise.
pub fn residuals<T: Real>(pred: &[T], truth: &[T]) -> Result<Vec<T>> {
    same_len("residual inputs", pred.len(), truth.len())?;
    Ok(pred.iter().zip(truth).map(|(&p, &t)| p - t).collect())
}

/// Ensemble CRPS, `mean|X − y| − ½ mean|X − X'|` over all ordered pairs.
///
/// The pair term uses the sorted-sample identity
/// `Σ_{i,j} |x_i − x_j| = 2 Σ_i (2i − k + 1) x_(i)`, so the cost is `O(k log k)`.
pub fn crps_ensemble<T: Real>(draws: &[T], truth: T) -> Result<T> {
    let k = draws.len();
    if k < 2 {
        return Err(Error::InvalidParameter(format!("CRPS needs at least 2 draws, got {k}")));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let kf = T::of(k as f64);
    let abs_err = sorted.iter().fold(T::zero(), |acc, &x| acc + (x - truth).abs()) / kf;
    let mut spread = T::zero();
    for (i, &x) in sorted.iter().enumerate() {
        spread += T::of(2.0 * i as f64 - k as f64 + 1.0) * x;
    }
    Ok(abs_err - spread / (kf * kf))
}

/// Average CRPS over rows; row `i` of `draws` holds the ensemble for `truth[i]`.
pub fn crps_mean<T: Real>(draws: &DMatrix<T>, truth: &DVector<T>) -> Result<T> {
    same_len("crps rows", draws.nrows(), truth.len())?;
    if truth.is_empty() {
        return Err(Error::InvalidParameter("CRPS needs at least one row".into()));
    }
    let mut total = T::zero();
    for i in 0..draws.nrows() {
        let row: Vec<T> = draws.row(i).iter().copied().collect();
        total += crps_ensemble(&row, truth[i])?;
    }
    Ok(total / T::of(truth.len() as f64))
}

/// `−2 Σ_i [log mean_r exp(ℓ_ir) − var_r(ℓ_ir)]` with the `(R−1)` sample variance.
pub fn waic<T: Real>(loglik: &DMatrix<T>) -> Result<T> {
    let reps = loglik.ncols();
    if reps < 2 {
        return Err(Error::InvalidParameter(format!("WAIC needs at least 2 replicates, got {reps}")));
    }
    if let Some(v) = loglik.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("WAIC input has non-finite entry {v:?}")));
    }
    let rf = T::of(reps as f64);
    let mut total = T::zero();
    for row in loglik.row_iter() {
        let max = row.iter().fold(T::min_value().unwrap(), |m, &v| m.max(v));
        let s = row.iter().fold(T::zero(), |acc, &v| acc + (v - max).exp());
        let lme = max + (s / rf).ln();
        let mean = row.sum() / rf;
        let var = row.iter().fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean)) / T::of(reps as f64 - 1.0);
        total += lme - var;
    }
    Ok(T::of(-2.0) * total)
}

/// Mann-Whitney AUC: `P(s⁺ > s⁻) + ½ P(s⁺ = s⁻)`, via midranks.
pub fn auc<T: Real>(scores: &[T], labels: &[bool]) -> Result<T> {
    same_len("auc inputs", scores.len(), labels.len())?;
    let n_pos = labels.iter().filter(|&&b| b).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidParameter("AUC needs both classes".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            j += 1;
        }
        // 1-based midrank of the tie block i..j
        let midrank = (i + j + 1) as f64 / 2.0;
        pos_rank_sum += midrank * idx[i..j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Ok(T::of((pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mspe_examples() {
        assert_eq!(mspe(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mspe(&[2.0, 3.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(mspe(&[0.0, 2.0], &[1.0, 0.0]).unwrap(), 2.5);
        assert!(mspe::<f64>(&[1.0], &[]).is_err());
    }

    #[test]
    fn crps_examples() {
        assert_eq!(crps_ensemble(&[0.3, 0.3, 0.3], 0.3).unwrap(), 0.0);
        assert_eq!(crps_ensemble(&[0.0, 0.0], 1.0).unwrap(), 1.0);
        assert!(crps_ensemble(&[1.0], 0.0).is_err());
        // {0, 1} vs 0: mean|X−y| = 0.5, ½·mean|X−X'| = ½·(2/4) = 0.25
        assert!((crps_ensemble(&[1.0, 0.0], 0.0).unwrap() - 0.25_f64).abs() < 1e-15);
    }

    #[test]
    fn waic_examples() {
        let m = DMatrix::from_row_slice(1, 2, &[0.5f64.ln(), 0.5f64.ln()]);
        assert!((waic(&m).unwrap() + 2.0 * 0.5f64.ln()).abs() < 1e-14);
        assert!(waic(&DMatrix::from_element(1, 2, f64::NAN)).is_err());
    }

    #[test]
    fn auc_examples() {
        let a: f64 = auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap();
        assert!((a - 0.75).abs() < 1e-15);
        assert_eq!(auc(&[1.0, 1.0, 1.0], &[true, false, true]).unwrap(), 0.5);
        assert_eq!(auc(&[0.0, 1.0], &[false, true]).unwrap(), 1.0);
        assert!(auc(&[0.0, 1.0], &[true, true]).is_err());
    }

    #[test]
    fn residuals_shift() {
        let r = residuals(&[3.0, 4.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r, vec![2.0, 2.0]);
    }
}
