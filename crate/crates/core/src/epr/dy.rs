//! Diaconis-Ylvisaker variates `∝ exp{a w − b ψ(w)}` for the three unit log-partitions.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::family::Family;
use crate::error::{Error, Result};
use crate::rng::{purpose, stream};

/// `log G` for `G ~ Gamma(shape, 1)`, accurate for tiny shapes: below 1 it
/// uses `log G_a = log G_{a+1} + log(U)/a`, which never underflows.
pub fn log_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let g = Gamma::new(shape + 1.0, 1.0).expect("shape + 1 > 0").sample(rng);
        let u: f64 = rng.random::<f64>();
        // random() is in [0, 1); 1 - u lies in (0, 1].
        g.ln() + (1.0 - u).ln() / shape
    } else {
        Gamma::new(shape, 1.0).expect("shape >= 1").sample(rng).ln()
    }
}

pub(crate) fn check(family: Family, a: f64, b: f64) -> std::result::Result<(), String> {
    let ok = match family {
        Family::Gaussian => b > 0.0 && a.is_finite(),
        Family::Poisson => a > 0.0 && b > 0.0,
        Family::Bernoulli => a > 0.0 && b > a,
    };
    if ok {
        return Ok(());
    }
    Err(match family {
        Family::Gaussian => format!("gaussian DY needs b > 0 (a={a}, b={b})"),
        Family::Poisson => format!("poisson DY needs a > 0 and b > 0 (a={a}, b={b}); rows with z = 0 need alpha_xi > 0"),
        Family::Bernoulli => format!("bernoulli DY needs b > a > 0 (a={a}, b={b}); rows with z = 0 need alpha_xi > 0"),
    })
}

/// One DY draw with an explicit generator; errors carry `row`.
///
/// Gaussian: `N(a/(2b), 1/(2b))`. Poisson: `log Gamma(a, rate b)`.
/// Bernoulli: `logit Beta(a, b − a)`, computed as `log G_a − log G_{b−a}`.
pub fn dy_draw<R: Rng + ?Sized>(family: Family, a: f64, b: f64, row: usize, rng: &mut R) -> Result<f64> {
    check(family, a, b).map_err(|message| Error::Row { row, message })?;
    Ok(match family {
        Family::Gaussian => {
            let z: f64 = rng.sample(StandardNormal);
            a / (2.0 * b) + z / (2.0 * b).sqrt()
        }
        Family::Poisson => log_gamma_variate(a, rng) - b.ln(),
        Family::Bernoulli => log_gamma_variate(a, rng) - log_gamma_variate(b - a, rng),
    })
}

/// Single seeded DY draw.
pub fn dy_sample(family: Family, a: f64, b: f64, seed: u64) -> Result<f64> {
    dy_draw(family, a, b, 0, &mut stream(seed, purpose::POSTERIOR, u64::MAX))
}
