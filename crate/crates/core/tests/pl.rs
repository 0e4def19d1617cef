use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

use heatlab::kernel::{kernel_at_origin, KernelWitness, QuadratureSpec};
use heatlab::pl::*;
use heatlab::ComplexTime;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sector_samples(n_mod: usize, n_th: usize, max_th: f64, lo: f64, hi: f64) -> Vec<ComplexTime> {
    let mut v = Vec::new();
    for i in 0..n_mod {
        let m = lo * (hi / lo).powf(i as f64 / (n_mod - 1) as f64);
        for j in 0..n_th {
            let th = -max_th + 2.0 * max_th * j as f64 / (n_th - 1) as f64;
            v.push(ComplexTime::new(m, th).unwrap());
        }
    }
    v
}

fn exp_over_z() -> ClosedFormWitness {
    ClosedFormWitness::new("exp(-z)/z", |z: Complex64| (-z).exp() / z)
}

fn reals(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn aux_factors_have_unit_modulus_on_the_upper_ray() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let eps = rng.gen_range(1e-3..0.999);
        let th = rng.gen_range(-1.5..1.5);
        let g = gamma_eps(eps, th).unwrap();
        let m = 10f64.powf(rng.gen_range(-3.0..3.0));
        let z = Complex64::from_polar(m, g);
        let a2 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let a3 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let b2 = rng.gen_range(0.0..4.0);
        let b3 = rng.gen_range(0.0..4.0);
        worst = worst.max((aux_h2(z, a2, b2, g).unwrap().norm() - 1.0).abs());
        worst = worst.max((aux_h3(z, a3, b3, g).unwrap().norm() - 1.0).abs());
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn theta_zero_is_the_hypothesis() {
    let h = PolyBoundHypothesis::new(1.7, 0.4, 3.0, 1.2, 0.8, 1.5).unwrap();
    for s in reals(50, 1e-3, 1e3) {
        let z = ComplexTime::real(s).unwrap();
        for eps in [0.01f64, 0.5, 0.99] {
            let want = h.sector_rhs(&z) * (eps.powf(-h.beta1) * h.bracket(s)).min(1.0);
            assert_eq!(pl_bound(&h, &z, eps).unwrap(), want);
            // with eps^{-beta1} the axis bound is recovered wherever it is the smaller one
            if h.bracket(s) * eps.powf(-h.beta1) < 1.0 {
                let axis = h.axis_rhs(s) * eps.powf(-h.beta1);
                assert!((pl_bound(&h, &z, eps).unwrap() - axis).abs() <= 1e-14 * axis);
            }
        }
    }
}

#[test]
fn exp_over_z_certifies_with_fitted_a2() {
    let w = exp_over_z();
    let a2 = fit_a2(&w, 1.0, 1.0, 1.0, 1.0, 2.0, &reals(2000, 1e-3, 1e3), 0.999).unwrap();
    // sup_s s e^{-s} = 1/e, so a2 <= e
    assert!(a2 <= std::f64::consts::E && a2 > 0.99 * std::f64::consts::E, "{a2}");
    let h = PolyBoundHypothesis::new(1.0, a2, 1.0, 1.0, 1.0, 2.0).unwrap();
    let samples = sector_samples(60, 31, 1.5, 1e-2, 1e2);
    for eps in [0.1, 0.5, 0.9] {
        let c = certify_pl(&w, &h, eps, &samples).unwrap();
        assert_eq!(c.status, CertStatus::Pass, "eps={eps} {c:?}");
    }
}

#[test]
fn non_holomorphic_violator_is_rejected() {
    // satisfies both hypotheses but is not analytic: decays on the axis only
    let w = ClosedFormWitness::new("axis-only decay", |z: Complex64| {
        if z.im == 0.0 {
            (-z).exp() / z
        } else {
            z.inv()
        }
    });
    let h = PolyBoundHypothesis::new(1.0, 2.0, 1.0, 1.0, 1.0, 2.0).unwrap();
    let c = certify_pl(&w, &h, 0.5, &sector_samples(30, 21, 1.4, 1e-1, 1e2)).unwrap();
    assert_eq!(c.sector_violations + c.axis_violations, 0);
    assert_eq!(c.status, CertStatus::BoundViolation);
    assert!(c.max_ratio > 1.0);
}

#[test]
fn free_kernel_certifies_as_a_numeric_witness() {
    let (alpha, d, r) = (1.0, 1usize, 1.0);
    let w = KernelWitness::new(alpha, d, r, QuadratureSpec::default());
    let a1 = kernel_at_origin(alpha, d, &ComplexTime::real(1.0).unwrap()).unwrap().re;
    let b1 = d as f64 / alpha;
    let b2 = (d as f64 + alpha) / alpha;
    let a2 = fit_a2(&w, a1, 1.0, b1, b2, 0.0, &reals(200, 0.05, 50.0), 0.98).unwrap();
    let h = PolyBoundHypothesis::new(a1, a2, 1.0, b1, b2, 0.0).unwrap();
    let samples = sector_samples(12, 9, 1.2, 0.1, 10.0);
    let c = certify_pl(&w, &h, 0.5, &samples).unwrap();
    assert!(w.is_numeric() && c.tol == 1e-6);
    assert_eq!(c.status, CertStatus::Pass, "{c:?}");
}

#[test]
fn epsilon_monotonicity_counterexample_off_axis() {
    let h = PolyBoundHypothesis::new(1.0, 4.0, 1.0, 0.0, 2.0, 0.0).unwrap();
    let z = ComplexTime::new(1.0, FRAC_PI_3).unwrap();
    assert!(h.bracket(1.0) < 1.0);
    assert!(pl_bound(&h, &z, 0.9).unwrap() > pl_bound(&h, &z, 0.1).unwrap());
}

#[test]
fn effective_exponent_at_theta_zero_and_edges() {
    assert_eq!(effective_exponent(2.0, 1, f64::INFINITY, 0.3, 0.0).unwrap(), 2.0);
    let g = gamma_eps(0.9, FRAC_PI_4).unwrap();
    let v = effective_exponent(3.0, 2, 4.0, 0.9, FRAC_PI_4).unwrap();
    assert!((v - 2.5 * (1.0 - FRAC_PI_4 / g)).abs() < 1e-15);
    assert!(gamma_eps(0.5, FRAC_PI_2).is_err());
}

proptest! {
    #[test]
    fn bound_never_exceeds_sector_rhs(
        a1 in 0.01f64..10.0, a2 in 0.01f64..10.0, a3 in 0.01f64..10.0,
        b1 in 0.0f64..3.0, b2 in 0.0f64..3.0, b3 in 0.0f64..3.0,
        m in 0.001f64..1000.0, th in -1.5f64..1.5, eps in 0.001f64..0.999,
    ) {
        let h = PolyBoundHypothesis::new(a1, a2, a3, b1, b2, b3).unwrap();
        let z = ComplexTime::new(m, th).unwrap();
        let v = pl_bound(&h, &z, eps).unwrap();
        prop_assert!(v >= 0.0 && v <= h.sector_rhs(&z) * (1.0 + 1e-14));
    }

    #[test]
    fn epsilon_monotone_on_the_axis(
        b1 in 0.0f64..3.0, b2 in 0.0f64..3.0, b3 in 0.0f64..3.0,
        s in 0.001f64..1000.0, e1 in 0.001f64..0.999, e2 in 0.001f64..0.999,
    ) {
        let h = PolyBoundHypothesis::new(1.3, 0.7, 2.0, b1, b2, b3).unwrap();
        let z = ComplexTime::real(s).unwrap();
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assume!(h.bracket(s) < 1.0);
        prop_assert!(pl_bound(&h, &z, hi).unwrap() <= pl_bound(&h, &z, lo).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn weaker_decay_with_angle_when_beta3_vanishes(
        b2 in 0.1f64..3.0, m in 1.0f64..100.0, eps in 0.01f64..0.99,
        t1 in 0.0f64..1.5, t2 in 0.0f64..1.5,
    ) {
        // prefactor removed: compare the interpolated factor only
        let h = PolyBoundHypothesis::new(1.0, 200.0, 1.0, 0.0, b2, 0.0).unwrap();
        prop_assume!(h.bracket(m) < 1.0);
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let f = |th: f64| pl_bound(&h, &ComplexTime::new(m, th).unwrap(), eps).unwrap();
        prop_assert!(f(hi) >= f(lo) * (1.0 - 1e-14));
    }

    #[test]
    fn conjugate_angles_agree(m in 0.01f64..100.0, th in 0.0f64..1.5, eps in 0.01f64..0.99) {
        let h = PolyBoundHypothesis::new(2.0, 0.3, 4.0, 1.0, 1.5, 0.5).unwrap();
        let a = pl_bound(&h, &ComplexTime::new(m, th).unwrap(), eps).unwrap();
        let b = pl_bound(&h, &ComplexTime::new(m, -th).unwrap(), eps).unwrap();
        prop_assert_eq!(a, b);
    }
}
