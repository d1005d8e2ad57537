use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::prior::GqnPrior;
use crate::dynamics::{SpatialDomain, Simulator};
use crate::error::{Error, Result};
use crate::rng::{purpose, stream};
use crate::scalar::Real;

/// Empirical space-time covariance of a replicate ensemble, kept in factored
/// form: `Σ̂ = C C' / R` with `C` the centred `nT x R` replicate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCovariance<T> {
    pub mean: DVector<T>,
    pub centered: DMatrix<T>,
}

impl<T: Real> EnsembleCovariance<T> {
    /// From raw replicates stored as columns.
    pub fn from_replicates(reps: &DMatrix<T>) -> Result<Self> {
        let r = reps.ncols();
        if r < 2 {
            return Err(Error::InvalidParameter(format!("ensemble needs R >= 2 replicates, got {r}")));
        }
        let mean = reps.column_mean();
        let mut centered = reps.clone();
        for mut c in centered.column_iter_mut() {
            c -= &mean;
        }
        Ok(EnsembleCovariance { mean, centered })
    }

    pub fn replicates(&self) -> usize {
        self.centered.ncols()
    }

    pub fn dim(&self) -> usize {
        self.centered.nrows()
    }

    /// Materializes `Σ̂` (denominator `R`).
    pub fn sigma_hat(&self) -> DMatrix<T> {
        let c = &self.centered;
        (c * c.transpose()) / T::of(self.replicates() as f64)
    }
}

/// Simulates `replicates` independent GQN runs, each with its own parameter
/// draw from `prior`, and returns their covariance over times `1..=steps`
/// stacked time-major (entry `(t-1) n + i`). Replicate `k` uses stream
/// `(seed, k)`, so the result does not depend on thread scheduling.
pub fn ensemble_covariance<T: Real>(prior: &GqnPrior, domain: &SpatialDomain<T>, steps: usize, replicates: usize, seed: u64) -> Result<EnsembleCovariance<T>> {
    prior.validate()?;
    if steps == 0 {
        return Err(Error::InvalidParameter("ensemble needs T >= 1".into()));
    }
    if replicates < 2 {
        return Err(Error::InvalidParameter(format!("ensemble needs R >= 2 replicates, got {replicates}")));
    }
    let n = domain.n();
    let cols: Vec<DVector<T>> = (0..replicates)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, purpose::ENSEMBLE, k as u64);
            let scenario = prior.sample(&mut rng);
            let spec = scenario.build::<T, _>(domain, &mut rng)?;
            let path = Simulator::new(&spec)?.run(steps, &mut rng)?;
            Ok(DVector::from_column_slice(&path.as_slice()[n..]))
        })
        .collect::<Result<_>>()?;
    EnsembleCovariance::from_replicates(&DMatrix::from_columns(&cols))
}
