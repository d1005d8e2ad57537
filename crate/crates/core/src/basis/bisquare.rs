use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{AreaUnit, Point};
use crate::rng::{purpose, stream};
use crate::scalar::Real;

/// `[1 - (d/γ)²]²` for `d <= γ`, else 0, in terms of the squared distance.
#[inline]
pub fn bisquare_from_d2<T: Real>(d2: T, gamma: T) -> T {
    let u = d2 / (gamma * gamma);
    if u <= T::one() {
        let w = T::one() - u;
        w * w
    } else {
        T::zero()
    }
}

/// Bisquare basis at `(s, t)` for the knot `(c, p)`, with `d` the Euclidean
/// norm of the stacked difference `(s - c, t - p)`.
pub fn bisquare_eval<T: Real>(s: Point<T>, t: T, knot: (Point<T>, T), gamma: T) -> Result<T> {
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParameter(format!("bisquare bandwidth must be > 0, got {gamma}")));
    }
    let (c, p) = knot;
    let d2 = (s[0] - c[0]).powi(2) + (s[1] - c[1]).powi(2) + (t - p).powi(2);
    Ok(bisquare_from_d2(d2, gamma))
}

/// Monte-Carlo area average of the bisquare basis, with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaIntegral<T> {
    pub mean: T,
    pub std_error: T,
}

/// Averages [`bisquare_eval`] over `n_mc` points drawn uniformly in `unit`.
/// Inputs are in the same units as the knot and bandwidth.
pub fn integrate_basis_over_area<T: Real>(unit: &AreaUnit<T>, t: T, knot: (Point<T>, T), gamma: T, n_mc: usize, seed: u64) -> Result<T> {
    integrate_basis_over_area_with_se(unit, t, knot, gamma, n_mc, seed).map(|r| r.mean)
}

pub fn integrate_basis_over_area_with_se<T: Real>(
    unit: &AreaUnit<T>,
    t: T,
    knot: (Point<T>, T),
    gamma: T,
    n_mc: usize,
    seed: u64,
) -> Result<AreaIntegral<T>> {
    let mut rng = stream(seed, purpose::POLYGON, 0);
    integrate_with_rng(unit, t, knot, gamma, n_mc, &mut rng)
}

pub(crate) fn integrate_with_rng<T: Real, R: Rng + ?Sized>(
    unit: &AreaUnit<T>,
    t: T,
    knot: (Point<T>, T),
    gamma: T,
    n_mc: usize,
    rng: &mut R,
) -> Result<AreaIntegral<T>> {
    if n_mc == 0 {
        return Err(Error::InvalidParameter("n_mc must be >= 1".into()));
    }
    let pts = unit.sample_uniform(n_mc, rng)?;
    let vals = pts.iter().map(|&s| bisquare_eval(s, t, knot, gamma)).collect::<Result<Vec<T>>>()?;
    let n = T::of(n_mc as f64);
    let mean = vals.iter().fold(T::zero(), |a, &v| a + v) / n;
    let std_error = if n_mc > 1 {
        let var = vals.iter().fold(T::zero(), |a, &v| a + (v - mean).powi(2)) / (n - T::one());
        (var / n).sqrt()
    } else {
        T::zero()
    };
    Ok(AreaIntegral { mean, std_error })
}
