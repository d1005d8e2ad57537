use gqnfit::calibration::{
    calibrate, calibrate_ensemble, ensemble_covariance, frobenius_match, frobenius_match_factored, psd_sqrt, read_calibration,
    write_calibration, CalibrationManifest, EnsembleCovariance, GqnPrior,
};
use gqnfit::dynamics::{NeighbourhoodScenario, SpatialDomain};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random::<f64>() * 2.0 - 1.0)
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = uniform(rng, n, n + 2);
    &a * a.transpose() / (n as f64)
}

fn objective(g: &DMatrix<f64>, k: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
    (g * k * g.transpose() - s).norm_squared()
}

/// Accelerated projected gradient with adaptive restart on `‖GKG' − Σ‖²_F`
/// over symmetric `K`. The objective is strongly convex with modulus
/// `μ = 2 λ_min(G'G)²`, so a gradient-mapping norm `g` bounds the distance to
/// the minimizer by `2g/μ`; iteration stops once that bound is below 1e-10.
fn projected_gradient(g: &DMatrix<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
    let r = g.ncols();
    let gtg = g.transpose() * g;
    let eig = SymmetricEigen::new(gtg.clone()).eigenvalues;
    let (lmax, lmin) = (eig.max(), eig.min());
    let step = 1.0 / (2.0 * lmax * lmax);
    let mu = 2.0 * lmin * lmin;
    let gsg = g.transpose() * s * g;
    let grad = |k: &DMatrix<f64>| (&gtg * k * &gtg - &gsg) * 2.0;
    let project = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    let (mut k, mut y, mut t) = (DMatrix::zeros(r, r), DMatrix::zeros(r, r), 1.0f64);
    for it in 0..2_000_000 {
        let next = project(&y - grad(&y) * step);
        // restart momentum when it points uphill
        if (&y - &next).dot(&(&next - &k)) > 0.0 {
            t = 1.0;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = &next + (&next - &k) * ((t - 1.0) / t_next);
        k = next;
        t = t_next;
        if it % 100 == 99 {
            let mapping = (&k - project(&k - grad(&k) * step)).norm() / step;
            if 2.0 * mapping / mu < 1e-10 {
                break;
            }
        }
    }
    k
}

#[test]
fn matches_projected_gradient_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let g = uniform(&mut rng, 12, 3);
        let s = random_psd(&mut rng, 12);
        let k = frobenius_match(&s, &g).unwrap();
        let oracle = projected_gradient(&g, &s);
        assert!((&k - &oracle).abs().max() <= 1e-6, "{}", (&k - &oracle).abs().max());
    }
}

#[test]
fn second_order_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = uniform(&mut rng, 15, 4);
    let s = random_psd(&mut rng, 15);
    let k = frobenius_match(&s, &g).unwrap();
    let f0 = objective(&g, &k, &s);
    for _ in 0..20 {
        let e = uniform(&mut rng, 4, 4);
        let e = (&e + e.transpose()) * 0.5;
        for sign in [1.0, -1.0] {
            assert!(objective(&g, &(&k + &e * (1e-3 * sign)), &s) >= f0);
        }
    }
}

#[test]
fn representable_target_has_zero_residual_and_nested_bases_improve() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = uniform(&mut rng, 20, 5);
    let m = random_psd(&mut rng, 5);
    let s = &g * &m * g.transpose();
    let cal = calibrate(&s, &g).unwrap();
    assert!(cal.frobenius_residual <= 1e-8 * s.norm());

    let s = random_psd(&mut rng, 20);
    let g1 = uniform(&mut rng, 20, 3);
    let mut g2 = DMatrix::zeros(20, 6);
    g2.columns_mut(0, 3).copy_from(&g1);
    g2.columns_mut(3, 3).copy_from(&uniform(&mut rng, 20, 3));
    let r1 = calibrate(&s, &g1).unwrap().frobenius_residual;
    let r2 = calibrate(&s, &g2).unwrap().frobenius_residual;
    assert!(r2 <= r1 + 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn calibration_invariants(seed in any::<u64>(), nt in 6usize..30, r in 1usize..6) {
        prop_assume!(r < nt);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = uniform(&mut rng, nt, r);
        let reps = uniform(&mut rng, nt, 12);
        let ens = EnsembleCovariance::from_replicates(&reps).unwrap();
        let s = ens.sigma_hat();
        let k = frobenius_match(&s, &g).unwrap();
        let scale = s.norm();

        // factored route agrees with the dense one
        let kf = frobenius_match_factored(&ens, &g).unwrap();
        prop_assert!((&k - &kf).abs().max() <= 1e-8 * k.abs().max().max(1e-300));

        // fixed point
        let again = frobenius_match(&(&g * &k * g.transpose()), &g).unwrap();
        prop_assert!((&again - &k).abs().max() <= 1e-8 * k.abs().max().max(1e-12));

        // PSD
        let eig = SymmetricEigen::new(k.clone()).eigenvalues;
        prop_assert!(eig.min() >= -1e-10 * eig.max().abs().max(1e-300));

        // rotation invariance of GKG'
        let omega = uniform(&mut rng, r, r).qr().q();
        let gr = &g * &omega;
        let kr = frobenius_match(&s, &gr).unwrap();
        let diff = (&g * &k * g.transpose() - &gr * &kr * gr.transpose()).norm();
        prop_assert!(diff <= 1e-8 * scale);

        // dense and factored residuals agree
        let a = calibrate(&s, &g).unwrap();
        let b = calibrate_ensemble(&ens, &g).unwrap();
        prop_assert!((a.frobenius_residual - b.frobenius_residual).abs() <= 1e-8 * scale);
        prop_assert_eq!(&a.l, &(&g * &a.k_sqrt));
    }

    #[test]
    fn psd_sqrt_reconstructs(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_psd(&mut rng, n);
        let r = psd_sqrt(&k).unwrap();
        prop_assert!((&r * &r - &k).norm() <= 1e-8 * k.norm());
        prop_assert!((&r - r.transpose()).abs().max() == 0.0 || (&r - r.transpose()).abs().max() <= 1e-12 * r.abs().max());
    }
}

#[test]
fn ensemble_is_bitwise_reproducible_and_artifacts_round_trip() {
    let d = SpatialDomain::lattice(3, 3, [1.0, 1.0]).unwrap();
    let prior = GqnPrior::around(&NeighbourhoodScenario::gaussian_study(), 0.5);
    let a = ensemble_covariance::<f64>(&prior, &d, 4, 30, 77).unwrap();
    let b = ensemble_covariance::<f64>(&prior, &d, 4, 30, 77).unwrap();
    assert_eq!(a.sigma_hat(), b.sigma_hat());
    assert_eq!(a.dim(), 36);

    let g = DMatrix::from_fn(36, 4, |i, j| (((i + 1) * (j + 2)) as f64).sin());
    let cal = calibrate_ensemble(&a, &g).unwrap();
    let dir = std::env::temp_dir().join(format!("gqnfit-cal-{}", std::process::id()));
    let manifest = CalibrationManifest::new(&cal, &prior, 30, 77).unwrap();
    write_calibration(&dir, &cal, &manifest).unwrap();
    let (back, m) = read_calibration::<f64>(&dir).unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(back.k, cal.k);
    assert_eq!(back.l, cal.l);
    assert_eq!(m, manifest);
}
