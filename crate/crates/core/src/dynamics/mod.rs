//! Linear (VAR(1)) and generalized-quadratic dynamics: operators, steppers and simulation.

mod domain;
mod io;
mod reaction_diffusion;
mod scenario;
mod simulate;
mod sparse;
mod spec;

pub use domain::SpatialDomain;
pub use io::{DynamicsSpecToml, MatrixToml, TensorToml};
pub use reaction_diffusion::build_reaction_diffusion;
pub use scenario::{NeighbourhoodScenario, QuadraticPattern};
pub use simulate::{gqn_step, simulate_series, var1_step, FieldSeries, Simulator};
pub use sparse::{QuadraticTensor, SparseMatrix};
pub use spec::{exponential_covariance, DynamicsSpec, GKind, Reaction};
