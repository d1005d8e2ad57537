use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::Range;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA_XI: f64 = 0.001;

fn default_range() -> Range {
    Range::LogUniform { low: 1e-3, high: 1e2 }
}

fn default_alpha_xi() -> f64 {
    DEFAULT_ALPHA_XI
}

/// Priors on the variance parameters of the EPR model.
///
/// `sigma2_z` is the Gaussian observation variance and is ignored for the
/// other families or when the dataset carries known per-row variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperprior {
    #[serde(default = "default_range")]
    pub sigma2_beta: Range,
    #[serde(default = "default_range")]
    pub sigma2_eta: Range,
    #[serde(default = "default_range")]
    pub sigma2_xi: Range,
    #[serde(default = "default_range")]
    pub sigma2_z: Range,
    #[serde(default = "default_alpha_xi")]
    pub alpha_xi: f64,
}

impl Default for Hyperprior {
    fn default() -> Self {
        Hyperprior {
            sigma2_beta: default_range(),
            sigma2_eta: default_range(),
            sigma2_xi: default_range(),
            sigma2_z: default_range(),
            alpha_xi: DEFAULT_ALPHA_XI,
        }
    }
}

impl Hyperprior {
    /// Every variance fixed.
    pub fn fixed(sigma2_beta: f64, sigma2_eta: f64, sigma2_xi: f64, sigma2_z: f64) -> Self {
        Hyperprior {
            sigma2_beta: Range::fixed(sigma2_beta),
            sigma2_eta: Range::fixed(sigma2_eta),
            sigma2_xi: Range::fixed(sigma2_xi),
            sigma2_z: Range::fixed(sigma2_z),
            alpha_xi: DEFAULT_ALPHA_XI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("sigma2_beta", &self.sigma2_beta),
            ("sigma2_eta", &self.sigma2_eta),
            ("sigma2_xi", &self.sigma2_xi),
            ("sigma2_z", &self.sigma2_z),
        ] {
            r.validate(name)?;
            let positive = match r {
                Range::Fixed { value } => *value > 0.0,
                Range::Uniform { low, .. } | Range::LogUniform { low, .. } => *low > 0.0,
                Range::Grid { values } => values.iter().all(|v| *v > 0.0),
            };
            if !positive {
                return Err(Error::InvalidParameter(format!("{name} must be a positive variance")));
            }
        }
        if !(self.alpha_xi >= 0.0 && self.alpha_xi.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha_xi must be >= 0, got {}", self.alpha_xi)));
        }
        Ok(())
    }

    /// Draws `θ*`. `sigma2_z` is drawn last, and only when asked for.
    pub fn sample<R: Rng + ?Sized>(&self, with_sigma2_z: bool, rng: &mut R) -> ThetaDraw {
        ThetaDraw {
            sigma2_beta: self.sigma2_beta.sample(rng),
            sigma2_eta: self.sigma2_eta.sample(rng),
            sigma2_xi: self.sigma2_xi.sample(rng),
            sigma2_z: with_sigma2_z.then(|| self.sigma2_z.sample(rng)),
        }
    }
}

/// One draw of the hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaDraw {
    pub sigma2_beta: f64,
    pub sigma2_eta: f64,
    pub sigma2_xi: f64,
    pub sigma2_z: Option<f64>,
}
