//! Quadratic nonlinear spatio-temporal dynamics, low-rank covariance
//! calibration by Frobenius-norm matching, and exact (MCMC-free) posterior
//! regression for Gaussian, Poisson and Bernoulli data.
//!
//! Numerical routines are generic over [`Real`] (`f32` or `f64`); the
//! `*F64` aliases below name the common double-precision instantiations.

pub mod basis;
pub mod calibration;
pub mod dynamics;
pub mod epr;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod table;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SpatialDomainF64 = dynamics::SpatialDomain<f64>;
pub type DynamicsSpecF64 = dynamics::DynamicsSpec<f64>;
pub type FieldSeriesF64 = dynamics::FieldSeries<f64>;
pub type KnotGridF64 = basis::KnotGrid<f64>;
pub type BasisMatrixF64 = basis::BasisMatrix<f64>;
pub type EnsembleCovarianceF64 = calibration::EnsembleCovariance<f64>;
pub type CalibratedCovarianceF64 = calibration::CalibratedCovariance<f64>;
pub type EprDesignF64 = epr::EprDesign<f64>;
pub type DatasetF64 = epr::Dataset<f64>;
pub type PosteriorDrawsF64 = epr::PosteriorDraws<f64>;
