//! Replicate ensembles, the Frobenius-optimal low-rank covariance `K`, and `L = G K^{1/2}`.

mod artifact;
mod ensemble;
mod frobenius;
mod prior;

pub use crate::linalg::psd_sqrt;
pub use artifact::{read_calibration, write_calibration, CalibrationManifest};
pub use ensemble::{ensemble_covariance, EnsembleCovariance};
pub use frobenius::{calibrate, calibrate_ensemble, frobenius_match, frobenius_match_factored, CalibratedCovariance, RANK_REL_TOL};
pub use prior::{GqnPrior, Range};
