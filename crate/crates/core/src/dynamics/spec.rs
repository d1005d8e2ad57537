use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::sparse::{QuadraticTensor, SparseMatrix};
use crate::error::{Error, Result};
use crate::linalg::check_psd;
use crate::scalar::Real;

/// Form of the transformation applied to `u_l` in the quadratic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GKind {
    /// `g(x) = γ0 exp(1 - x / γ1)`.
    #[default]
    Exponential,
    /// `g(x) = x`; used by the reaction-diffusion operator, whose logistic
    /// coefficients are folded into `A` and `B` directly.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reaction<T> {
    #[serde(default)]
    pub kind: GKind,
    pub gamma0: T,
    pub gamma1: T,
}

impl<T: Real> Reaction<T> {
    pub fn exponential(gamma0: T, gamma1: T) -> Self {
        Reaction { kind: GKind::Exponential, gamma0, gamma1 }
    }

    pub fn identity(gamma0: T, gamma1: T) -> Self {
        Reaction { kind: GKind::Identity, gamma0, gamma1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1 > T::zero()) {
            return Err(Error::InvalidParameter(format!("gamma1 must be > 0, got {}", self.gamma1)));
        }
        Ok(())
    }

    #[inline]
    pub fn g(&self, x: T) -> T {
        match self.kind {
            GKind::Exponential => self.gamma0 * (T::one() - x / self.gamma1).exp(),
            GKind::Identity => x,
        }
    }
}

/// Everything needed to step and simulate a GQN (or, with empty `b`, VAR(1)) process.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSpec<T> {
    pub a: SparseMatrix<T>,
    pub b: QuadraticTensor<T>,
    pub reaction: Reaction<T>,
    pub sigma_eta: DMatrix<T>,
    pub sigma_0: DMatrix<T>,
    pub dt: T,
}

impl<T: Real> DynamicsSpec<T> {
    /// Linear spec: empty `B`.
    pub fn var1(a: SparseMatrix<T>, sigma_eta: DMatrix<T>, sigma_0: DMatrix<T>) -> Self {
        let n = a.nrows();
        DynamicsSpec {
            a,
            b: QuadraticTensor::empty(n),
            reaction: Reaction::exponential(T::zero(), T::one()),
            sigma_eta,
            sigma_0,
            dt: T::one(),
        }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_linear(&self) -> bool {
        self.b.is_empty()
    }

    /// Checks shapes, `γ1 > 0`, `Δt > 0`, and that both covariances are PSD.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || self.a.ncols() != n {
            return Err(Error::dim("transition matrix", "square n x n with n >= 1", format!("{}x{}", n, self.a.ncols())));
        }
        if self.b.n() != n {
            return Err(Error::dim("quadratic tensor", n, self.b.n()));
        }
        for (name, m) in [("sigma_eta", &self.sigma_eta), ("sigma_0", &self.sigma_0)] {
            if m.shape() != (n, n) {
                return Err(Error::dim(name, format!("{n}x{n}"), format!("{}x{}", m.nrows(), m.ncols())));
            }
        }
        self.reaction.validate()?;
        if !(self.dt > T::zero()) {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        check_psd("sigma_eta", &self.sigma_eta)?;
        check_psd("sigma_0", &self.sigma_0)?;
        Ok(())
    }
}

/// `σ² exp(-D / φ)` applied elementwise to a distance matrix.
pub fn exponential_covariance<T: Real>(dist: &DMatrix<T>, sigma2: T, phi: T) -> Result<DMatrix<T>> {
    if !(phi > T::zero()) || sigma2 < T::zero() {
        return Err(Error::InvalidParameter(format!("exponential covariance needs phi > 0 and sigma2 >= 0 (phi={phi}, sigma2={sigma2})")));
    }
    Ok(dist.map(|d| sigma2 * (-d / phi).exp()))
}
