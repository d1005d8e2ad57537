use gqnfit::basis::{bisquare_eval, build_basis_matrix, integrate_basis_over_area_with_se, BasisMatrix, KnotGrid};
use gqnfit::dynamics::SpatialDomain;
use gqnfit::geometry::{AreaUnit, Point, Polygon};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

/// Winding-number containment, independent of the library's even-odd test.
fn winding_contains(ring: &[Point<f64>], p: Point<f64>) -> bool {
    let mut wn = 0i32;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= p[1] {
            if b[1] > p[1] && cross > 0.0 {
                wn += 1;
            }
        } else if b[1] <= p[1] && cross < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

/// Mean of the basis over the centres of a `k x k` grid on the bounding box
/// that fall inside the ring.
fn grid_oracle(ring: &[Point<f64>], t: f64, knot: (Point<f64>, f64), gamma: f64, k: usize) -> f64 {
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for v in ring {
        for d in 0..2 {
            lo[d] = lo[d].min(v[d]);
            hi[d] = hi[d].max(v[d]);
        }
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for a in 0..k {
        for b in 0..k {
            let p = [lo[0] + (a as f64 + 0.5) / k as f64 * (hi[0] - lo[0]), lo[1] + (b as f64 + 0.5) / k as f64 * (hi[1] - lo[1])];
            if winding_contains(ring, p) {
                let d2 = (p[0] - knot.0[0]).powi(2) + (p[1] - knot.0[1]).powi(2) + (t - knot.1).powi(2);
                let u = d2 / (gamma * gamma);
                sum += if u <= 1.0 { (1.0 - u).powi(2) } else { 0.0 };
                count += 1;
            }
        }
    }
    sum / count as f64
}

/// Star-shaped polygon with `m` vertices around `c`.
fn star_polygon<R: Rng>(rng: &mut R, c: Point<f64>) -> Vec<Point<f64>> {
    let m = rng.random_range(5..10);
    let mut angles: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ring: Vec<Point<f64>> = angles
        .iter()
        .map(|&a| {
            let r = 0.3 + 0.7 * rng.random::<f64>();
            [c[0] + r * a.cos(), c[1] + r * a.sin()]
        })
        .collect();
    ring.push(ring[0]);
    ring
}

#[test]
fn area_average_matches_grid_oracle() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for case in 0..10 {
        let c = [rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0];
        let ring = star_polygon(&mut rng, c);
        let unit = AreaUnit::new(format!("p{case}"), vec![Polygon { exterior: ring.clone(), holes: vec![] }]).unwrap();
        let knot = ([c[0] + rng.random::<f64>() - 0.5, c[1] + rng.random::<f64>() - 0.5], rng.random::<f64>() * 0.5);
        let gamma = 0.8 + rng.random::<f64>();
        let t = rng.random::<f64>() * 0.5;
        let mc = integrate_basis_over_area_with_se(&unit, t, knot, gamma, 4000, case).unwrap();
        let oracle = grid_oracle(&ring, t, knot, gamma, 200);
        assert!(mc.std_error > 0.0);
        assert!((mc.mean - oracle).abs() <= 3.0 * mc.std_error, "case {case}: mc {} +- {} vs grid {oracle}", mc.mean, mc.std_error);
    }
}

#[test]
fn reversal_invariance_within_three_se() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let ring = star_polygon(&mut rng, [0.0, 0.0]);
    let unit = AreaUnit::new("u", vec![Polygon { exterior: ring, holes: vec![] }]).unwrap();
    let knot = ([0.2, -0.1], 0.0);
    let a = integrate_basis_over_area_with_se(&unit, 0.0, knot, 1.2, 2000, 1).unwrap();
    let b = integrate_basis_over_area_with_se(&unit.reversed(), 0.0, knot, 1.2, 2000, 2).unwrap();
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() <= 3.0 * se);
}

proptest! {
    #[test]
    fn bisquare_continuous_at_bandwidth(gamma in 0.01f64..10.0, angle in 0.0f64..std::f64::consts::TAU, tfrac in 0.0f64..1.0) {
        let dir = [angle.cos() * (1.0 - tfrac * tfrac).sqrt(), angle.sin() * (1.0 - tfrac * tfrac).sqrt(), tfrac];
        let at = |scale: f64| {
            let d = gamma * scale;
            bisquare_eval([d * dir[0], d * dir[1]], d * dir[2], ([0.0, 0.0], 0.0), gamma).unwrap()
        };
        prop_assert!(at(1.0 - 1e-9) < 1e-15);
        prop_assert_eq!(at(1.0 + 1e-9), 0.0);
    }

    #[test]
    fn column_count_is_rs_times_rt(r_s in 1usize..20, r_t in 1usize..6) {
        let d = SpatialDomain::lattice(4, 5, [1.0, 1.0]).unwrap();
        let grid = KnotGrid::regular(r_s, r_t, d.bounds(), (1.0, 6.0), None, true).unwrap();
        let b = build_basis_matrix(&d, &[1, 2, 3, 4, 5, 6], &grid, 10, 0).unwrap();
        prop_assert_eq!(b.r(), r_s * r_t);
        prop_assert_eq!(b.nrows(), 20 * 6);
    }
}

#[test]
fn areal_basis_is_deterministic_and_round_trips() {
    let units: Vec<AreaUnit<f64>> = (0..6).map(|i| AreaUnit::square(format!("c{i}"), [(i % 3) as f64, (i / 3) as f64], 0.9)).collect();
    let d = SpatialDomain::areal(units).unwrap();
    let grid = KnotGrid::regular(4, 3, d.bounds(), (1.0, 3.0), None, true).unwrap();
    let a = build_basis_matrix(&d, &[1, 2, 3], &grid, 300, 9).unwrap();
    let b = build_basis_matrix(&d, &[1, 2, 3], &grid, 300, 9).unwrap();
    assert_eq!(a.g, b.g);
    let (mut csv, mut side) = (Vec::new(), Vec::new());
    a.write_csv(&mut csv).unwrap();
    a.write_sidecar(&mut side).unwrap();
    let back = BasisMatrix::<f64>::read(csv.as_slice(), side.as_slice()).unwrap();
    assert_eq!(back.g, a.g);
    assert_eq!(back.rows, a.rows);
}
