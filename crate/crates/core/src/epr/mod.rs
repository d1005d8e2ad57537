//! Exact posterior regression: independent posterior replicates of fixed
//! effects, basis coefficients and fine-scale terms without a Markov chain.

pub mod design;
pub mod dy;
pub mod family;
pub mod hyper;
pub mod io;
pub mod predict;
pub mod sampler;

pub use design::{build_h, build_q, DenseEpr, EprDesign};
pub use dy::{dy_draw, dy_sample, log_gamma_variate};
pub use family::{logistic, Family};
pub use hyper::{Hyperprior, ThetaDraw, DEFAULT_ALPHA_XI};
pub use io::{DrawsManifest, BLOCKS};
pub use predict::{expand_time_varying, latent_predict, replicate_mean, response_mean, PredictRows};
pub use sampler::{posterior_replicates, Dataset, PosteriorDraws};
