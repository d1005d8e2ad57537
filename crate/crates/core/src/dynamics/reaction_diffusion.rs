use nalgebra::{DMatrix, DVector};

use super::domain::SpatialDomain;
use super::sparse::{QuadraticTensor, SparseMatrix};
use super::spec::{DynamicsSpec, Reaction};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Assembles the finite-difference reaction-diffusion operator on a lattice.
///
/// Interior rows get five entries: the self coefficient
/// `1 - 2δ(Δt/Δs1² + Δt/Δs2²) + Δtγ0` and the four neighbours
/// `(Δt/Δs²)[δ ± (δ_fwd - δ_back)/4]`. On the boundary, off-lattice neighbour
/// terms are dropped without rebalancing the self coefficient, and a missing
/// `δ_fwd` or `δ_back` is replaced by `δ(s)` in the gradient term.
///
/// `B` holds `-Δtγ0/γ1` at `(i, i, i)` and the reaction is flagged as
/// [`GKind::Identity`](super::GKind::Identity), giving the logistic `-Δtγ0 u²/γ1`.
/// Both covariances are returned as zero matrices for the caller to fill.
pub fn build_reaction_diffusion<T: Real>(domain: &SpatialDomain<T>, delta: &DVector<T>, gamma0: T, gamma1: T, dt: T) -> Result<DynamicsSpec<T>> {
    let SpatialDomain::Lattice { rows, cols, spacing } = *domain else {
        return Err(Error::Unsupported("reaction-diffusion operator requires a lattice domain".into()));
    };
    let n = rows * cols;
    if delta.len() != n {
        return Err(Error::dim("diffusion field", n, delta.len()));
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter("dt must be > 0".into()));
    }
    if !(gamma1 > T::zero()) {
        return Err(Error::InvalidParameter("gamma1 must be > 0".into()));
    }
    let h1 = dt / (spacing[0] * spacing[0]);
    let h2 = dt / (spacing[1] * spacing[1]);
    let two = T::of(2.0);
    let quarter = T::of(0.25);
    let idx = |r: usize, c: usize| r * cols + c;

    let mut trip = Vec::with_capacity(5 * n);
    for r in 0..rows {
        for c in 0..cols {
            let i = idx(r, c);
            let d = delta[i];
            trip.push((i, i, T::one() - two * d * (h1 + h2) + dt * gamma0));

            let east = (c + 1 < cols).then(|| idx(r, c + 1));
            let west = c.checked_sub(1).map(|c| idx(r, c));
            let grad1 = (east.map_or(d, |j| delta[j]) - west.map_or(d, |j| delta[j])) * quarter;
            if let Some(j) = east {
                trip.push((i, j, h1 * (d + grad1)));
            }
            if let Some(j) = west {
                trip.push((i, j, h1 * (d - grad1)));
            }

            let north = (r + 1 < rows).then(|| idx(r + 1, c));
            let south = r.checked_sub(1).map(|r| idx(r, c));
            let grad2 = (north.map_or(d, |j| delta[j]) - south.map_or(d, |j| delta[j])) * quarter;
            if let Some(j) = north {
                trip.push((i, j, h2 * (d + grad2)));
            }
            if let Some(j) = south {
                trip.push((i, j, h2 * (d - grad2)));
            }
        }
    }
    let b_val = -dt * gamma0 / gamma1;
    Ok(DynamicsSpec {
        a: SparseMatrix::from_triplets(n, n, trip)?,
        b: QuadraticTensor::from_entries(n, (0..n).map(|i| (i, i, i, b_val)))?,
        reaction: Reaction::identity(gamma0, gamma1),
        sigma_eta: DMatrix::zeros(n, n),
        sigma_0: DMatrix::zeros(n, n),
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: usize, cols: usize) -> SpatialDomain<f64> {
        SpatialDomain::lattice(rows, cols, [1.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_delta_interior_stencil() {
        let s = build_reaction_diffusion(&grid(5, 5), &DVector::from_element(25, 0.1), 0.0, 1.0, 1.0).unwrap();
        let a = s.a.to_dense();
        let i = 12;
        assert_eq!(s.a.row(i).count(), 5);
        assert_eq!(a[(i, i)], 1.0 - 0.4);
        for j in [11, 13, 7, 17] {
            assert_eq!(a[(i, j)], 0.1);
        }
    }

    #[test]
    fn b_entries_and_row_sums() {
        let s = build_reaction_diffusion(&grid(4, 4), &DVector::from_element(16, 0.07), 0.05, 10.0, 1.0).unwrap();
        assert!(s.b.entries().all(|(i, k, l, v)| i == k && k == l && v == -0.005));
        assert_eq!(s.b.nnz(), 16);
        let interior: f64 = s.a.row(5).map(|(_, v)| v).sum();
        assert!((interior - 1.05).abs() < 1e-14);
    }

    #[test]
    fn ramp_in_s1_shifts_east_west() {
        let c = 0.01;
        let d = grid(3, 5);
        let delta = DVector::from_fn(15, |i, _| 0.1 + c * (i % 5) as f64);
        let s = build_reaction_diffusion(&d, &delta, 0.0, 1.0, 1.0).unwrap().a.to_dense();
        let i = 7;
        assert!((s[(i, 8)] - (delta[i] + c / 2.0)).abs() < 1e-15);
        assert!((s[(i, 6)] - (delta[i] - c / 2.0)).abs() < 1e-15);
        assert!((s[(i, 12)] - delta[i]).abs() < 1e-15);
    }

    #[test]
    fn boundary_rows_truncated() {
        let s = build_reaction_diffusion(&grid(3, 3), &DVector::from_element(9, 0.1), 0.0, 1.0, 1.0).unwrap();
        assert_eq!(s.a.row(0).count(), 3);
        assert_eq!(s.a.to_dense()[(0, 0)], 0.6);
    }

    #[test]
    fn non_lattice_rejected() {
        let d = SpatialDomain::points(vec!["a".into()], vec![[0.0, 0.0]]).unwrap();
        assert!(matches!(build_reaction_diffusion(&d, &DVector::from_element(1, 0.1), 0.0, 1.0, 1.0), Err(Error::Unsupported(_))));
    }
}
