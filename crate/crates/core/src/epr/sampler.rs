use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use super::design::EprDesign;
use super::dy::{check, dy_draw};
use super::family::Family;
use super::hyper::{Hyperprior, ThetaDraw};
use crate::basis::RowLabel;
use crate::error::{Error, Result};
use crate::linalg::standard_normal;
use crate::rng::{purpose, stream};
use crate::scalar::Real;

/// Observed responses with their fixed-effect design.
#[derive(Debug, Clone)]
pub struct Dataset<T: Real> {
    pub z: DVector<T>,
    pub x: DMatrix<T>,
    pub family: Family,
    /// Known per-row Gaussian variances; `None` samples `σ_z²` from the hyperprior.
    pub sigma2: Option<DVector<T>>,
    pub rows: Vec<RowLabel>,
}

impl<T: Real> Dataset<T> {
    pub fn new(z: DVector<T>, x: DMatrix<T>, family: Family, rows: Vec<RowLabel>) -> Result<Self> {
        let d = Dataset { z, x, family, sigma2: None, rows };
        d.validate()?;
        Ok(d)
    }

    pub fn with_sigma2(mut self, sigma2: DVector<T>) -> Result<Self> {
        self.sigma2 = Some(sigma2);
        self.validate()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.z.len();
        if self.x.nrows() != n {
            return Err(Error::dim("design rows", n, self.x.nrows()));
        }
        if !self.rows.is_empty() && self.rows.len() != n {
            return Err(Error::dim("row labels", n, self.rows.len()));
        }
        for (i, z) in self.z.iter().enumerate() {
            self.family.check_observation(i, z.as_f64())?;
        }
        if let Some(s) = &self.sigma2 {
            if s.len() != n {
                return Err(Error::dim("sigma2", n, s.len()));
            }
            if let Some(i) = s.iter().position(|v| !(v.as_f64() > 0.0)) {
                return Err(Error::Row { row: i, message: "gaussian variance must be positive".into() });
            }
        }
        Ok(())
    }
}

/// Independent posterior replicates; column `k` of every matrix is replicate `k`.
#[derive(Debug, Clone)]
pub struct PosteriorDraws<T: Real> {
    pub xi: DMatrix<T>,
    pub beta: DMatrix<T>,
    pub eta: DMatrix<T>,
    pub q: DMatrix<T>,
    /// The DY data block of `w` for each replicate.
    pub y_rep: DMatrix<T>,
    pub theta: Vec<ThetaDraw>,
}

impl<T: Real> PosteriorDraws<T> {
    pub fn n_reps(&self) -> usize {
        self.theta.len()
    }

    /// Stacked `w = (y_rep, w_β, w_η, w_ξ)` of replicate `k`, recovered as `H(ξ,β,η) + Qq`.
    pub fn stacked_w(&self, design: &EprDesign<T>, k: usize) -> DVector<T> {
        let (p, r) = (self.beta.nrows(), self.eta.nrows());
        let mut theta = DVector::zeros(p + r);
        theta.rows_mut(0, p).copy_from(&self.beta.column(k));
        theta.rows_mut(p, r).copy_from(&self.eta.column(k));
        design.apply_h(&self.xi.column(k).into_owned(), &theta) + design.apply_q(&self.q.column(k).into_owned())
    }
}

struct Replicate<T: Real> {
    xi: DVector<T>,
    theta: DVector<T>,
    q: DVector<T>,
    y: DVector<T>,
    hyper: ThetaDraw,
}

/// Draws `w` for one replicate, in the order `θ*`, `y_rep`, `w_β`, `w_η`, `w_ξ`.
fn draw_w<T: Real, R: Rng + ?Sized>(
    data: &Dataset<T>,
    design: &EprDesign<T>,
    hyper: &Hyperprior,
    rng: &mut R,
) -> Result<(DVector<T>, ThetaDraw)> {
    let (n, p, r) = (design.n(), design.p(), design.r());
    let needs_z = data.family == Family::Gaussian && data.sigma2.is_none();
    let th = hyper.sample(needs_z, rng);
    let mut w = DVector::zeros(design.stacked_len());
    for i in 0..n {
        let s2 = match (&data.sigma2, th.sigma2_z) {
            (Some(s), _) => s[i].as_f64(),
            (None, Some(s)) => s,
            (None, None) => 1.0,
        };
        let (a, b) = data.family.gcm_params(data.z[i].as_f64(), s2, hyper.alpha_xi);
        w[i] = T::of(dy_draw(data.family, a, b, i, rng)?);
    }
    let blocks = [(n, p, th.sigma2_beta), (n + p, r, th.sigma2_eta), (n + p + r, n, th.sigma2_xi)];
    for (start, len, var) in blocks {
        let e: DVector<T> = standard_normal(len, rng);
        w.rows_mut(start, len).copy_from(&(e * T::of(var.sqrt())));
    }
    Ok((w, th))
}

/// `n_reps` independent replicates of `(ξ, β, η, q)`; replicate `k` uses its
/// own stream, so results do not depend on thread count.
pub fn posterior_replicates<T: Real>(
    data: &Dataset<T>,
    design: &EprDesign<T>,
    n_reps: usize,
    hyper: &Hyperprior,
    seed: u64,
) -> Result<PosteriorDraws<T>> {
    data.validate()?;
    hyper.validate()?;
    let (n, p, r) = (design.n(), design.p(), design.r());
    if data.n() != n {
        return Err(Error::dim("dataset rows vs design", n, data.n()));
    }
    if data.x.ncols() != p {
        return Err(Error::dim("dataset covariates vs design", p, data.x.ncols()));
    }
    if n_reps == 0 {
        return Err(Error::InvalidParameter("n_reps must be positive".into()));
    }
    // Shape preconditions do not depend on θ for the count families.
    if data.family != Family::Gaussian {
        for i in 0..n {
            let (a, b) = data.family.gcm_params(data.z[i].as_f64(), 1.0, hyper.alpha_xi);
            check(data.family, a, b).map_err(|m| Error::Row { row: i, message: format!("{m}; set alpha_xi > 0") })?;
        }
    }

    let reps: Vec<Replicate<T>> = (0..n_reps)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, purpose::POSTERIOR, k as u64);
            let (w, hyper) = draw_w(data, design, hyper, &mut rng)?;
            let (xi, theta) = design.solve(&w);
            let q = design.null_coords(&w);
            Ok(Replicate { xi, theta, q, y: w.rows(0, n).into_owned(), hyper })
        })
        .collect::<Result<_>>()?;

    let mut out = PosteriorDraws {
        xi: DMatrix::zeros(n, n_reps),
        beta: DMatrix::zeros(p, n_reps),
        eta: DMatrix::zeros(r, n_reps),
        q: DMatrix::zeros(n, n_reps),
        y_rep: DMatrix::zeros(n, n_reps),
        theta: Vec::with_capacity(n_reps),
    };
    for (k, rep) in reps.into_iter().enumerate() {
        out.xi.set_column(k, &rep.xi);
        out.beta.set_column(k, &rep.theta.rows(0, p));
        out.eta.set_column(k, &rep.theta.rows(p, r));
        out.q.set_column(k, &rep.q);
        out.y_rep.set_column(k, &rep.y);
        out.theta.push(rep.hyper);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(family: Family, z: Vec<f64>) -> (Dataset<f64>, EprDesign<f64>) {
        let n = z.len();
        let x = DMatrix::from_element(n, 1, 1.0);
        let l = DMatrix::from_fn(n, 2, |i, j| ((i + 1) as f64 * (j + 1) as f64).sin());
        let d = Dataset::new(DVector::from_vec(z), x.clone(), family, vec![]).unwrap();
        (d, EprDesign::new(&x, &l).unwrap())
    }

    #[test]
    fn poisson_zero_needs_alpha_xi() {
        let (d, des) = toy(Family::Poisson, vec![0.0, 3.0, 1.0]);
        let mut h = Hyperprior::default();
        h.alpha_xi = 0.0;
        let e = posterior_replicates(&d, &des, 4, &h, 1).unwrap_err();
        let msg = e.to_string();
        assert!(msg.starts_with("row 0:") && msg.contains("alpha_xi"), "{msg}");
        h.alpha_xi = 0.001;
        assert!(posterior_replicates(&d, &des, 4, &h, 1).is_ok());
    }

    #[test]
    fn deterministic_and_reconstructs() {
        let (d, des) = toy(Family::Bernoulli, vec![0.0, 1.0, 1.0, 0.0, 1.0]);
        let h = Hyperprior::default();
        let a = posterior_replicates(&d, &des, 8, &h, 42).unwrap();
        let b = posterior_replicates(&d, &des, 8, &h, 42).unwrap();
        assert_eq!(a.xi, b.xi);
        assert_eq!(a.q, b.q);
        for k in 0..8 {
            let w = a.stacked_w(&des, k);
            let y = w.rows(0, 5);
            assert!((y - a.y_rep.column(k)).abs().max() <= 1e-8 * a.y_rep.column(k).abs().max().max(1.0));
        }
    }

    #[test]
    fn family_data_mismatch_is_rejected() {
        let x = DMatrix::from_element(2, 1, 1.0);
        assert!(Dataset::new(DVector::from_vec(vec![0.5, 1.0]), x, Family::Bernoulli, vec![]).is_err());
    }
}
