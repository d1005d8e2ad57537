use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{NeighbourhoodScenario, QuadraticPattern};
use crate::error::{Error, Result};

/// Sampling distribution for one scalar parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Range {
    Fixed { value: f64 },
    Uniform { low: f64, high: f64 },
    LogUniform { low: f64, high: f64 },
    /// Equally likely values.
    Grid { values: Vec<f64> },
}

impl Range {
    pub fn fixed(value: f64) -> Self {
        Range::Fixed { value }
    }

    /// Uniform on `[value (1 - rel), value (1 + rel)]`.
    pub fn around(value: f64, rel: f64) -> Self {
        if value == 0.0 || rel == 0.0 {
            return Range::Fixed { value };
        }
        let (a, b) = (value * (1.0 - rel), value * (1.0 + rel));
        Range::Uniform { low: a.min(b), high: a.max(b) }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            Range::Fixed { value } => value.is_finite(),
            Range::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            Range::LogUniform { low, high } => *low > 0.0 && high.is_finite() && low <= high,
            Range::Grid { values } => !values.is_empty() && values.iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid range for {name}: {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Range::Fixed { value } => value,
            Range::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Range::LogUniform { low, high } => (low.ln() + (high.ln() - low.ln()) * rng.random::<f64>()).exp(),
            Range::Grid { ref values } => values[rng.random_range(0..values.len())],
        }
    }
}

/// Independent per-parameter ranges for the neighbourhood dynamics used to
/// generate a calibration ensemble. `pattern = none` gives a VAR(1) ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GqnPrior {
    pub delta1: Range,
    pub delta2: Range,
    pub nu: Range,
    pub p_a: Range,
    pub p_b: Range,
    pub rho: Range,
    pub gamma0: Range,
    pub gamma1: Range,
    pub sigma2_eta: Range,
    pub phi_eta: Range,
    pub sigma2_0: Range,
    pub phi_0: Range,
    #[serde(default)]
    pub pattern: QuadraticPattern,
}

impl GqnPrior {
    /// Point-mass prior at `s`.
    pub fn fixed(s: &NeighbourhoodScenario) -> Self {
        Self::around(s, 0.0)
    }

    /// Uniform `±rel` around every continuous parameter of `s`; Bernoulli
    /// probabilities and the neighbourhood radius stay fixed.
    pub fn around(s: &NeighbourhoodScenario, rel: f64) -> Self {
        let r = |v| Range::around(v, rel);
        GqnPrior {
            delta1: r(s.delta1),
            delta2: r(s.delta2),
            nu: r(s.nu),
            p_a: Range::fixed(s.p_a),
            p_b: Range::fixed(s.p_b),
            rho: Range::fixed(s.rho),
            gamma0: r(s.gamma0),
            gamma1: r(s.gamma1),
            sigma2_eta: r(s.sigma2_eta),
            phi_eta: r(s.phi_eta),
            sigma2_0: r(s.sigma2_0),
            phi_0: r(s.phi_0),
            pattern: s.pattern,
        }
    }

    /// Same prior with the quadratic term removed.
    pub fn linear(&self) -> Self {
        GqnPrior { pattern: QuadraticPattern::None, ..self.clone() }
    }

    fn fields(&self) -> [(&'static str, &Range); 12] {
        [
            ("delta1", &self.delta1),
            ("delta2", &self.delta2),
            ("nu", &self.nu),
            ("p_a", &self.p_a),
            ("p_b", &self.p_b),
            ("rho", &self.rho),
            ("gamma0", &self.gamma0),
            ("gamma1", &self.gamma1),
            ("sigma2_eta", &self.sigma2_eta),
            ("phi_eta", &self.phi_eta),
            ("sigma2_0", &self.sigma2_0),
            ("phi_0", &self.phi_0),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.fields().iter().try_for_each(|(n, r)| r.validate(n))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NeighbourhoodScenario {
        NeighbourhoodScenario {
            delta1: self.delta1.sample(rng),
            delta2: self.delta2.sample(rng),
            nu: self.nu.sample(rng),
            p_a: self.p_a.sample(rng),
            p_b: self.p_b.sample(rng),
            rho: self.rho.sample(rng),
            gamma0: self.gamma0.sample(rng),
            gamma1: self.gamma1.sample(rng),
            sigma2_eta: self.sigma2_eta.sample(rng),
            phi_eta: self.phi_eta.sample(rng),
            sigma2_0: self.sigma2_0.sample(rng),
            phi_0: self.phi_0.sample(rng),
            pattern: self.pattern,
        }
    }
}
