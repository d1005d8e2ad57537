//! Scores for fits and forecasts.

mod report;
mod scores;

pub use report::{write_residuals_csv, ResidualRow, ScoreReport};
pub use scores::{auc, crps_ensemble, crps_mean, mspe, residuals, waic};
