//! Randomised neighbourhood GQN specifications of the kind used in the
//! lattice simulation studies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::domain::SpatialDomain;
use super::sparse::{QuadraticTensor, SparseMatrix};
use super::spec::{exponential_covariance, DynamicsSpec, Reaction};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which `(k, l)` pairs may carry a quadratic coefficient for output site `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadraticPattern {
    /// Only `k = l = i`.
    Diagonal,
    /// Every pair with both `k` and `l` within distance `rho` of `i`.
    #[default]
    Neighbourhood,
    /// No quadratic term (a VAR(1) process).
    None,
}

/// Parameters of a neighbourhood GQN:
///
/// * `a_ii = delta1`; `a_ij = delta2 * Bernoulli(p_a)` for `0 < d(s_i, s_j) < rho`;
/// * `b_{i,kl} = nu * Bernoulli(p_b)` on the pairs selected by `pattern`;
/// * `Σ_η = sigma2_eta exp(-D/phi_eta)`, `Σ_0 = sigma2_0 exp(-D/phi_0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodScenario {
    pub delta1: f64,
    pub delta2: f64,
    pub nu: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub rho: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub sigma2_eta: f64,
    pub phi_eta: f64,
    pub sigma2_0: f64,
    pub phi_0: f64,
    #[serde(default)]
    pub pattern: QuadraticPattern,
}

impl NeighbourhoodScenario {
    /// Gaussian larger-parameter-space study (10x10 lattice, T = 14).
    pub fn gaussian_study() -> Self {
        NeighbourhoodScenario {
            delta1: 0.005,
            delta2: 0.007,
            nu: 0.028,
            p_a: 0.9,
            p_b: 0.9,
            rho: 3.0,
            gamma0: 0.01,
            gamma1: 25.0,
            sigma2_eta: 0.2,
            phi_eta: 15.0,
            sigma2_0: 0.4,
            phi_0: 20.0,
            pattern: QuadraticPattern::Neighbourhood,
        }
    }

    pub fn poisson_study() -> Self {
        NeighbourhoodScenario {
            delta1: 0.001,
            delta2: 0.0015,
            nu: 0.1,
            p_a: 0.9,
            p_b: 0.75,
            rho: 4.0,
            gamma0: 0.0001,
            gamma1: 20.0,
            sigma2_eta: 0.2,
            phi_eta: 20.0,
            sigma2_0: 0.4,
            phi_0: 25.0,
            pattern: QuadraticPattern::Neighbourhood,
        }
    }

    pub fn bernoulli_study() -> Self {
        NeighbourhoodScenario {
            delta1: 0.009,
            delta2: 0.0017,
            nu: 0.03,
            p_a: 0.9,
            p_b: 0.95,
            rho: 3.0,
            gamma0: 0.01,
            gamma1: 20.0,
            sigma2_eta: 0.3,
            phi_eta: 20.0,
            sigma2_0: 0.4,
            phi_0: 25.0,
            pattern: QuadraticPattern::Neighbourhood,
        }
    }

    /// Small-parameter study: weight 0.14 on the four adjacent sites and the
    /// site itself, diagonal quadratic term with `nu = 1`.
    pub fn adjacent_study() -> Self {
        NeighbourhoodScenario {
            delta1: 0.14,
            delta2: 0.14,
            nu: 1.0,
            p_a: 1.0,
            p_b: 1.0,
            rho: 1.2,
            gamma0: 0.05,
            gamma1: 10.0,
            sigma2_eta: 0.5,
            phi_eta: 10.0,
            sigma2_0: 1.0,
            phi_0: 10.0,
            pattern: QuadraticPattern::Diagonal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [("p_a", self.p_a), ("p_b", self.p_b)];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        let positive = [("rho", self.rho), ("gamma1", self.gamma1), ("phi_eta", self.phi_eta), ("phi_0", self.phi_0)];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.sigma2_eta < 0.0 || self.sigma2_0 < 0.0 {
            return Err(Error::InvalidParameter("variances must be >= 0".into()));
        }
        Ok(())
    }

    /// Draws the Bernoulli masks and assembles the spec on `domain`.
    pub fn build<T: Real, R: Rng + ?Sized>(&self, domain: &SpatialDomain<T>, rng: &mut R) -> Result<DynamicsSpec<T>> {
        self.validate()?;
        let n = domain.n();
        let dist = domain.distances();
        let rho = T::of(self.rho);
        let near: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| dist[(i, j)] < rho).collect()).collect();

        let mut a = Vec::new();
        for i in 0..n {
            for &j in &near[i] {
                if i == j {
                    a.push((i, j, T::of(self.delta1)));
                } else if dist[(i, j)] > T::zero() && rng.random_bool(self.p_a) {
                    a.push((i, j, T::of(self.delta2)));
                }
            }
        }

        let mut b = Vec::new();
        match self.pattern {
            QuadraticPattern::None => {}
            QuadraticPattern::Diagonal => {
                for i in 0..n {
                    if rng.random_bool(self.p_b) {
                        b.push((i, i, i, T::of(self.nu)));
                    }
                }
            }
            QuadraticPattern::Neighbourhood => {
                for i in 0..n {
                    for &k in &near[i] {
                        for &l in &near[i] {
                            if rng.random_bool(self.p_b) {
                                b.push((i, k, l, T::of(self.nu)));
                            }
                        }
                    }
                }
            }
        }

        let spec = DynamicsSpec {
            a: SparseMatrix::from_triplets(n, n, a)?,
            b: QuadraticTensor::from_entries(n, b)?,
            reaction: Reaction::exponential(T::of(self.gamma0), T::of(self.gamma1)),
            sigma_eta: exponential_covariance(&dist, T::of(self.sigma2_eta), T::of(self.phi_eta))?,
            sigma_0: exponential_covariance(&dist, T::of(self.sigma2_0), T::of(self.phi_0))?,
            dt: T::one(),
        };
        Ok(spec)
    }
}
