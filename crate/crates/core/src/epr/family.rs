use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Data family of the response.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Gaussian,
    Poisson,
    Bernoulli,
}

impl Family {
    /// Maps the latent linear predictor to the data mean.
    #[inline]
    pub fn inverse_link(self, y: f64) -> f64 {
        match self {
            Family::Gaussian => y,
            Family::Poisson => y.exp(),
            Family::Bernoulli => logistic(y),
        }
    }

    /// Checks the support of one observation.
    pub fn check_observation(self, row: usize, z: f64) -> Result<()> {
        let ok = match self {
            Family::Gaussian => z.is_finite(),
            Family::Poisson => z >= 0.0 && z.fract() == 0.0 && z.is_finite(),
            Family::Bernoulli => z == 0.0 || z == 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Row { row, message: format!("value {z} is outside the support of the {self:?} family") })
        }
    }

    /// DY shape/rate `(α_i, κ_i)` of the data block of the posterior.
    ///
    /// Gaussian: `(z/σ², 1/(2σ²))`; Poisson: `(z + α_ξ, 1)`;
    /// Bernoulli: `(z + α_ξ, 1 + 2α_ξ)`.
    #[inline]
    pub fn gcm_params(self, z: f64, sigma2: f64, alpha_xi: f64) -> (f64, f64) {
        match self {
            Family::Gaussian => (z / sigma2, 0.5 / sigma2),
            Family::Poisson => (z + alpha_xi, 1.0),
            Family::Bernoulli => (z + alpha_xi, 1.0 + 2.0 * alpha_xi),
        }
    }

    /// Log-likelihood of `z` given the latent linear predictor `y`.
    pub fn log_likelihood(self, z: f64, y: f64, sigma2: f64) -> f64 {
        match self {
            Family::Gaussian => -0.5 * ((2.0 * std::f64::consts::PI * sigma2).ln() + (z - y).powi(2) / sigma2),
            Family::Poisson => z * y - y.exp() - ln_factorial(z),
            Family::Bernoulli => z * y - softplus(y),
        }
    }
}

#[inline]
pub fn logistic(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^y)` without overflow.
#[inline]
pub fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

fn ln_factorial(k: f64) -> f64 {
    (1..=k as u64).map(|i| (i as f64).ln()).sum()
}
