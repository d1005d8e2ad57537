use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::domain::SpatialDomain;
use super::sparse::SparseMatrix;
use super::spec::DynamicsSpec;
use crate::error::{Error, Result};
use crate::linalg::{sampling_factor, standard_normal};
use crate::rng::{purpose, stream};
use crate::scalar::Real;

/// Latent field on `n` sites at integer time labels; column `j` holds time `times[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries<T> {
    pub values: DMatrix<T>,
    pub domain: SpatialDomain<T>,
    pub times: Vec<i64>,
}

impl<T: Real> FieldSeries<T> {
    pub fn new(values: DMatrix<T>, domain: SpatialDomain<T>, times: Vec<i64>) -> Result<Self> {
        if values.nrows() != domain.n() {
            return Err(Error::dim("field series rows", domain.n(), values.nrows()));
        }
        if values.ncols() != times.len() || times.is_empty() {
            return Err(Error::dim("field series columns", times.len(), values.ncols()));
        }
        Ok(FieldSeries { values, domain, times })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Drops the leading columns, keeping times `from..`.
    pub fn tail(&self, from: usize) -> Self {
        FieldSeries {
            values: self.values.columns(from, self.len() - from).into_owned(),
            domain: self.domain.clone(),
            times: self.times[from..].to_vec(),
        }
    }

    /// Time-major stacking: entry `t * n + i` is site `i` at column `t`.
    pub fn stacked(&self) -> DVector<T> {
        DVector::from_column_slice(self.values.as_slice())
    }
}

fn check_len<T: Real>(what: &'static str, v: &DVector<T>, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::dim(what, n, v.len()));
    }
    Ok(())
}

/// `A u + η`.
pub fn var1_step<T: Real>(u_prev: &DVector<T>, a: &SparseMatrix<T>, eta: &DVector<T>) -> Result<DVector<T>> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim("transition matrix", "square", format!("{}x{}", a.nrows(), a.ncols())));
    }
    check_len("u_prev", u_prev, a.ncols())?;
    check_len("eta", eta, a.nrows())?;
    Ok(DVector::from_fn(a.nrows(), |i, _| a.row_dot(i, u_prev) + eta[i]))
}

/// `A u + Σ b_{i,kl} u_k g(u_l) + η`. Rows of `B` with no stored entries
/// skip the quadratic sum, so an empty `B` reproduces [`var1_step`] bit for bit.
pub fn gqn_step<T: Real>(u_prev: &DVector<T>, spec: &DynamicsSpec<T>, eta: &DVector<T>) -> Result<DVector<T>> {
    spec.reaction.validate()?;
    let n = spec.n();
    check_len("u_prev", u_prev, n)?;
    check_len("eta", eta, n)?;
    if spec.b.n() != n {
        return Err(Error::dim("quadratic tensor", n, spec.b.n()));
    }
    let g: Vec<T> = if spec.b.is_empty() { Vec::new() } else { u_prev.iter().map(|&x| spec.reaction.g(x)).collect() };
    Ok(DVector::from_fn(n, |i, _| {
        let mut v = spec.a.row_dot(i, u_prev);
        if !spec.b.row_is_empty(i) {
            v += spec.b.row(i).fold(T::zero(), |acc, (k, l, b)| acc + b * u_prev[k] * g[l]);
        }
        v + eta[i]
    }))
}

/// Precomputed noise factors for repeated simulation from one spec.
#[derive(Debug, Clone)]
pub struct Simulator<'a, T> {
    spec: &'a DynamicsSpec<T>,
    f0: DMatrix<T>,
    f_eta: DMatrix<T>,
}

impl<'a, T: Real> Simulator<'a, T> {
    pub fn new(spec: &'a DynamicsSpec<T>) -> Result<Self> {
        spec.validate()?;
        Ok(Simulator {
            spec,
            f0: sampling_factor("sigma_0", &spec.sigma_0)?,
            f_eta: sampling_factor("sigma_eta", &spec.sigma_eta)?,
        })
    }

    /// Columns `U_0, ..., U_T` as an `n x (T+1)` matrix.
    pub fn run<R: Rng + ?Sized>(&self, steps: usize, rng: &mut R) -> Result<DMatrix<T>> {
        let n = self.spec.n();
        let mut out = DMatrix::zeros(n, steps + 1);
        let mut u = &self.f0 * standard_normal::<T, _>(n, rng);
        out.set_column(0, &u);
        for t in 1..=steps {
            let eta = &self.f_eta * standard_normal::<T, _>(n, rng);
            u = gqn_step(&u, self.spec, &eta)?;
            out.set_column(t, &u);
        }
        Ok(out)
    }
}

/// Simulates `U_0 ~ N(0, Σ_0)` followed by `steps` GQN transitions.
/// The result has `steps + 1` columns labelled `0..=steps`.
pub fn simulate_series<T: Real>(spec: &DynamicsSpec<T>, domain: &SpatialDomain<T>, steps: usize, seed: u64) -> Result<FieldSeries<T>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("simulate_series needs T >= 1".into()));
    }
    if domain.n() != spec.n() {
        return Err(Error::dim("domain size", spec.n(), domain.n()));
    }
    let mut rng = stream(seed, purpose::SIMULATE, 0);
    let values = Simulator::new(spec)?.run(steps, &mut rng)?;
    FieldSeries::new(values, domain.clone(), (0..=steps as i64).collect())
}
