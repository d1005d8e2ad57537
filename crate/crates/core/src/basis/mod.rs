//! Space-time bisquare basis functions, at points or averaged over areal units.

mod bisquare;
mod geojson;
mod io;
mod knots;
mod matrix;

pub use self::geojson::read_geojson_units;
pub use bisquare::{bisquare_eval, bisquare_from_d2, integrate_basis_over_area, integrate_basis_over_area_with_se, AreaIntegral};
pub use io::BasisSidecar;
pub use knots::{KnotGrid, DEFAULT_BANDWIDTH_FACTOR};
pub use matrix::{build_basis_matrix, BasisMatrix, RowLabel, DEFAULT_N_MC};
