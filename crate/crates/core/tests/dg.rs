use std::f64::consts::PI;

use heatlab::dg::*;
use heatlab::kernel::kernel_poisson;
use heatlab::operator::*;
use heatlab::ComplexTime;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Exact real-time Poisson kernel on an open 1-d window.
fn poisson_open(n: usize, l: f64, t: f64) -> RadialKernel<impl Fn(f64) -> Complex64 + Send + Sync> {
    let g = GridSpec::open(1, n, l, n).unwrap();
    RadialKernel::new(g, Some(ComplexTime::real(t).unwrap()), move |r| {
        kernel_poisson(1, c(t), r).unwrap()
    })
}

fn poisson_torus(n: usize, l: f64, t: f64) -> RadialKernel<impl Fn(f64) -> Complex64 + Send + Sync> {
    let g = GridSpec::new(1, n, l).unwrap();
    RadialKernel::new(g, Some(ComplexTime::real(t).unwrap()), move |r| {
        periodized_poisson_1d(c(t), r, l)
    })
}

#[test]
fn masks_partition_the_torus() {
    let g = GridSpec::new(2, 16, 5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let x = rng.gen_range(0..g.len());
        let r = rng.gen_range(0.2..3.0);
        let mut count = vec![0u32; g.len()];
        for k in 0..12 {
            let m = annulus_mask(&DyadicAnnulus { center: x, base_radius: r, index: k }, &g);
            for (c, on) in count.iter_mut().zip(m) {
                *c += on as u32;
            }
        }
        assert!(count.iter().all(|&c| c == 1));
    }
}

#[test]
fn mask_examples() {
    let g = GridSpec::new(1, 32, 8.0).unwrap();
    let h = g.h();
    let all = annulus_mask(&DyadicAnnulus { center: 5, base_radius: 8.0, index: 0 }, &g);
    assert!(all.iter().all(|&b| b));
    let a = DyadicAnnulus { center: 0, base_radius: h, index: 3 };
    assert!(annulus_mask(&a, &g)[5]);
    assert!(!annulus_mask(&a, &g)[4]);
    assert_eq!(annulus_index(5.0 * h, h), 3);
}

#[test]
fn opnorm_scalar_and_rank_one() {
    let w = 0.25;
    let m = SubMatrix::from_fn(5, 5, |i, j| if i == j { c(3.0 / w) } else { c(0.0) });
    for (p, q) in [(2.0, 2.0), (1.0, 1.0), (1.0, f64::INFINITY), (1.5, 1.5)] {
        let nb = opnorm(&m, w, p, q, 1).unwrap();
        if p == 1.0 && q.is_infinite() {
            assert!((nb.upper - 3.0 / w).abs() < 1e-12);
        } else {
            assert!((nb.upper - 3.0).abs() < 1e-12, "{p},{q}: {nb:?}");
            assert!(nb.lower <= nb.upper);
        }
    }
    let u = [1.0, -2.0, 0.5, 3.0];
    let v = [0.3, 0.0, 1.0];
    let m = SubMatrix::from_fn(4, 3, |i, j| Complex64::new(u[i] * v[j], 0.5 * u[i] * v[j]));
    let l2 = |a: &[f64]| (a.iter().map(|x| x * x).sum::<f64>() * w).sqrt();
    let want = l2(&u) * l2(&v) * 1.25f64.sqrt();
    let nb = opnorm(&m, w, 2.0, 2.0, 1).unwrap();
    assert!((nb.upper - want).abs() < 1e-12 * want);
}

fn brute_force(m: &SubMatrix, p: f64, q: f64, rng: &mut ChaCha8Rng) -> f64 {
    let lp = |v: &[Complex64], e: f64| v.iter().map(|a| a.norm().powf(e)).sum::<f64>().powf(1.0 / e);
    let ratio = |x: &[Complex64]| {
        let y: Vec<Complex64> = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j) * x[j]).sum())
            .collect();
        lp(&y, q) / lp(x, p)
    };
    let mut best = (0.0, vec![c(0.0); m.cols()]);
    for _ in 0..100_000 {
        let x: Vec<Complex64> = (0..m.cols())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let r = ratio(&x);
        if r > best.0 {
            best = (r, x);
        }
    }
    // local refinement
    let mut step = 0.1;
    while step > 1e-7 {
        let mut improved = false;
        for _ in 0..400 {
            let x: Vec<Complex64> = best
                .1
                .iter()
                .map(|a| a + Complex64::new(rng.gen_range(-step..step), rng.gen_range(-step..step)))
                .collect();
            let r = ratio(&x);
            if r > best.0 {
                best = (r, x);
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best.0
}

#[test]
fn interval_brackets_brute_force_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let vals: Vec<Complex64> = (0..36)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let m = SubMatrix::from_fn(6, 6, |i, j| vals[i * 6 + j]);
        let nb = opnorm(&m, 1.0, 1.5, 3.0, 5).unwrap();
        let brute = brute_force(&m, 1.5, 3.0, &mut rng);
        assert!(nb.upper >= brute * (1.0 - 1e-12), "{nb:?} vs {brute}");
        assert!(nb.lower <= brute * (1.0 + 1e-6), "{nb:?} vs {brute}");
        assert!(nb.upper <= UNCERTAIN_GAP * nb.lower);
    }
}

#[test]
fn exact_corner_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let vals: Vec<Complex64> = (0..7 * 9)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let m = SubMatrix::from_fn(7, 9, |i, j| vals[i * 9 + j]);
    let w = 0.1;
    let a = opnorm(&m, w, 1.0, 2.0, 0).unwrap();
    let b = opnorm(&m.transpose(), w, 2.0, f64::INFINITY, 0).unwrap();
    assert!(a.exact && b.exact);
    assert!((a.upper - b.upper).abs() < 1e-10 * a.upper);
}

#[test]
fn poisson_profile_decays_like_d_plus_alpha() {
    let k = poisson_open(4096, 1024.0, 1.0);
    let x = k.grid().center();
    let params = DGParams::new(1.0, f64::INFINITY, f64::INFINITY, 2.0, Variant::Plain);
    let rep = dg_profile(&k, x, 1.0, &params, 12, 0).unwrap();
    let slope = rep.fitted_slope.unwrap();
    assert!((slope + 2.0).abs() <= 0.1, "slope {slope}");
    assert!(rep.pass && rep.fitted_cdg.is_finite());
    assert_eq!(rep.flat_records().len(), rep.per_k.len());
    // ball row carries the kernel maximum
    assert!((rep.per_k[0].norm.upper - 1.0 / PI).abs() < 1e-12);
}

#[test]
fn diagonal_kernel_profile() {
    let g = GridSpec::new(1, 128, 32.0).unwrap();
    let w = g.weight();
    let m = KernelMatrix::from_fn(g, None, |i, j| if i == j { c(2.0 / w) } else { c(0.0) });
    let params = DGParams::new(2.0, 2.0, 2.0, 2.0, Variant::Plain);
    let rep = dg_profile(&m, 10, 1.0, &params, 8, 0).unwrap();
    assert!(rep.per_k.iter().filter(|a| a.k >= 1).all(|a| a.norm.upper == 0.0));
    assert!((rep.per_k[0].norm.upper - 2.0).abs() < 1e-12);
    assert!(rep.pass);
    assert!(rep.fitted_slope.is_none());
}

#[test]
fn profile_rejects_bad_params_and_degenerate_grids() {
    let k = poisson_torus(64, 16.0, 1.0);
    let bad = DGParams::new(1.0, 2.0, 2.0, 0.9, Variant::Plain);
    assert!(dg_profile(&k, 0, 1.0, &bad, 6, 0).is_err());
    let ok = DGParams::new(2.0, 2.0, 2.0, 2.0, Variant::Plain);
    assert!(matches!(
        dg_profile(&k, 0, 20.0, &ok, 6, 0),
        Err(heatlab::LabError::Degenerate(_))
    ));
}

#[test]
fn pointwise_equivalence_on_poisson() {
    let k = poisson_open(4096, 1024.0, 1.0);
    let x = k.grid().center();
    let rep = pointwise_equivalence_check(&k, &[x], 1.0, 2.5, 2.0, None).unwrap();
    assert!(rep.pass_a && rep.pass_b, "{rep:?}");
    let (a, b) = (rep.const_a.unwrap(), rep.const_b.unwrap());
    assert!((1.0..=8.0).contains(&a) && (1.0..=8.0).contains(&b), "{a} {b}");
}

#[test]
fn pointwise_spike_is_reported() {
    let clean = poisson_open(512, 128.0, 1.0);
    let x = clean.grid().center();
    let ref_rep = pointwise_equivalence_check(&clean, &[x], 1.0, 2.5, 2.0, None).unwrap();
    let h = clean.grid().h();
    let spike_at = 32.0;
    let spiked = RadialKernel::new(clean.grid().clone(), None, move |r| {
        let base = kernel_poisson(1, c(1.0), r).unwrap();
        if (r - spike_at).abs() < h / 2.0 {
            base + 1.0
        } else {
            base
        }
    });
    let rep = pointwise_equivalence_check(&spiked, &[x], 1.0, 2.5, 2.0, Some(ref_rep.c_dg)).unwrap();
    assert!(!rep.pass_a);
    let v = rep.violation_a.unwrap();
    assert_eq!(v.x, x);
    assert!((spiked.grid().dist(v.x, v.y) - spike_at).abs() < 1e-12);
}

#[test]
fn pointwise_zero_kernel() {
    let g = GridSpec::new(1, 64, 16.0).unwrap();
    let z = RadialKernel::new(g, None, |_| c(0.0));
    let rep = pointwise_equivalence_check(&z, &[3], 1.0, 2.5, 2.0, None).unwrap();
    assert!(rep.pass_a && rep.pass_b);
    assert_eq!(rep.c_dg, 0.0);
    assert_eq!(rep.c_pointwise, 0.0);
}

#[test]
fn geometry_lemma_has_no_violations() {
    for d in 1..=3 {
        let rep = check_geom_annuli(d, 20_000, 9).unwrap();
        assert_eq!(rep.violations(), 0, "{rep:?}");
        assert!(rep.witnessed_annuli > 1000 && rep.witnessed_ball > 1000, "{rep:?}");
    }
}

#[test]
fn ball_average_of_constant() {
    let g = GridSpec::new(2, 32, 8.0).unwrap();
    let r = 4.0 * g.h();
    for p in [1.0, 2.0, 4.0] {
        let nf = ball_average(&g, &vec![1.0; g.len()], p, p, r).unwrap();
        let want = (ball_count(&g, r) as f64 * g.weight() / (r * r)).powf(1.0 / p);
        assert!(nf.iter().all(|v| (v - want).abs() < 1e-12 * want));
    }
}

#[test]
fn averages_are_equivalent_and_bounded() {
    let g = GridSpec::new(1, 256, 64.0).unwrap();
    let radii: Vec<f64> = [4.0, 8.0, 16.0].iter().map(|m| m * g.h()).collect();
    for p in [1.0, 2.0, 4.0] {
        for row in check_average_equivalence(&g, p, &radii, 20, 1).unwrap() {
            assert!(row.pass, "{row:?}");
        }
        for row in check_average_bounded(&g, p, 2.0 * p, &radii, 20, 1).unwrap() {
            assert!(row.pass, "{row:?}");
        }
    }
}

#[test]
fn hypercontractive_poisson_and_identity() {
    let ks: Vec<_> = [1.0, 2.0, 4.0, 8.0, 10.0].iter().map(|&t| (t, poisson_torus(1024, 256.0, t))).collect();
    let refs: Vec<(f64, &dyn KernelSource)> = ks.iter().map(|(t, k)| (*t, k as &dyn KernelSource)).collect();
    let params = DGParams::new(1.0, f64::INFINITY, f64::INFINITY, 2.0, Variant::Plain);
    let rep = check_hypercontractive(&refs, &params, 1.0 / PI, None, 0).unwrap();
    assert!(rep.pass);
    for row in &rep.rows {
        // 1 -> inf is the kernel at the origin: 1/(π t) up to periodization
        let at_zero = periodized_poisson_1d(c(row.r), 0.0, 256.0).re;
        assert!((row.norm.upper - at_zero).abs() < 1e-12 * at_zero, "{row:?}");
        assert!((row.norm.upper * PI * row.r - 1.0).abs() < 1e-2);
    }

    let g = GridSpec::new(1, 64, 8.0).unwrap();
    let w = g.weight();
    let id = KernelMatrix::from_fn(g, None, |i, j| if i == j { c(1.0 / w) } else { c(0.0) });
    let params = DGParams::new(2.0, 2.0, 2.0, 2.0, Variant::Plain);
    let rep = check_hypercontractive(&[(1.0, &id), (4.0, &id)], &params, 1.0, None, 0).unwrap();
    assert!(rep.rows.iter().all(|r| (r.norm.upper - 1.0).abs() < 1e-12 && r.rhs == 1.0));
}

#[test]
fn corner_duality_on_whole_kernel() {
    let k = poisson_torus(4096, 1024.0, 2.0);
    let a = full_norm(&k, 1.0, 2.0, 0).unwrap();
    let b = full_norm(&k, 2.0, f64::INFINITY, 0).unwrap();
    assert!((a.upper - b.upper).abs() < 1e-9 * a.upper);
    // DFT shortcut agrees with the dense path on a small grid
    let small = poisson_torus(256, 64.0, 1.0);
    let dense = full_norm(&small, 2.0, 2.0, 0).unwrap().upper;
    assert!((dense - 1.0).abs() < 1e-6, "{dense}");
    let big = full_norm(&k, 2.0, 2.0, 0).unwrap().upper;
    assert!((big - 1.0).abs() < 1e-6, "{big}");
}

#[test]
fn square_root_relation_on_semigroup() {
    let g = GridSpec::new(1, 256, 32.0).unwrap();
    let op = build_operator(g.clone(), 1.0, PotentialSpec::bump(&g, 1.0, 4.0)).unwrap();
    for t in [0.5, 2.0] {
        let k = op.semigroup_kernel(&ComplexTime::real(t).unwrap());
        let k2 = op.semigroup_kernel(&ComplexTime::real(2.0 * t).unwrap());
        let exact = check_square_root(&k, &k2, 1.0, 1e-9, 0).unwrap();
        assert!(exact.pass, "{exact:?}");
        let interval = check_square_root(&k, &k2, 1.5, 1e-9, 0).unwrap();
        assert!(interval.pass, "{interval:?}");
    }
}

#[test]
fn two_radius_on_poisson() {
    let k = poisson_torus(2048, 512.0, 1.0);
    let x = k.grid().center();
    let params = DGParams::new(1.0, f64::INFINITY, f64::INFINITY, 2.0, Variant::Plain);
    let prof = dg_profile(&k, x, 1.0, &params, 10, 0).unwrap();
    let r0s = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let rep = check_two_radius(&k, x, 1.0, &r0s, &params, prof.fitted_cdg, 10, false, 0).unwrap();
    assert!(rep.pass, "{:?} {:?}", rep.constants, rep.constants_improved);
    let equal = rep.constants.iter().find(|(r0, _)| *r0 == 1.0).unwrap().1;
    assert!(equal <= TWO_RADIUS_SLACK * prof.fitted_cdg && equal >= prof.fitted_cdg / TWO_RADIUS_SLACK);
}

#[test]
fn dual_profiles() {
    let ks: Vec<_> = [1.0, 2.0, 4.0].iter().map(|&t| (t, poisson_open(4096, 1024.0, t))).collect();
    let refs: Vec<(f64, &dyn KernelSource)> = ks.iter().map(|(t, k)| (*t, k as &dyn KernelSource)).collect();
    let x = ks[0].1.grid().center();
    let one = check_dual(&refs, x, 1.0, 2.0, 12, 0).unwrap();
    for r in one.base.iter().chain(&one.two_to_dual).chain(&one.p_to_two) {
        assert!(r.pass, "{:?} {:?}", r.params, r.fitted_slope);
    }
    assert!(one.pass);
    for r in &one.p_to_two {
        assert!(r.fitted_slope.unwrap() <= -2.0 + 0.1);
    }
    let two = check_dual(&refs[..1], x, 2.0, 2.0, 12, 0).unwrap();
    let (a, b) = (two.two_to_dual[0].fitted_cdg, two.p_to_two[0].fitted_cdg);
    assert!(a / b <= 2.0 && b / a <= 2.0);

    let g = GridSpec::new(1, 128, 32.0).unwrap();
    let w = g.weight();
    let diag = KernelMatrix::from_fn(g, None, |i, j| if i == j { c(1.0 / w) } else { c(0.0) });
    let rep = check_dual(&[(1.0, &diag)], 64, 1.0, 2.0, 6, 0).unwrap();
    assert!(rep.pass);
}

#[test]
fn lp_boundedness() {
    let g = GridSpec::new(1, 1024, 128.0).unwrap();
    let free = build_operator(g.clone(), 1.0, PotentialSpec::Zero).unwrap();
    let pot = build_operator(g.clone(), 1.0, PotentialSpec::bump(&g, 1.0, 4.0)).unwrap();
    // ball centered off the bump; inside it local damping flattens short dyadic windows
    let x = g.len() / 4;
    let kern = |op: &DiscreteOperator, t: f64| op.semigroup_kernel(&ComplexTime::real(t).unwrap());
    let ts = [0.2, 0.5, 1.0, 2.0];
    let fk: Vec<_> = ts.iter().map(|&t| (t, kern(&free, t))).collect();
    let fr: Vec<(f64, &dyn KernelSource)> = fk.iter().map(|(t, k)| (*t, k as &dyn KernelSource)).collect();
    let rep = check_lp_bounded(&fr, x, 1.0, 2.0, 10, 0).unwrap();
    assert!(rep.norms.iter().all(|(_, n)| (n.upper - 1.0).abs() < 1e-9), "{:?}", rep.norms);
    let rep = check_lp_bounded(&fr, x, 2.0, 2.0, 10, 0).unwrap();
    assert!(rep.norms.iter().all(|(_, n)| n.upper <= 1.0 + 1e-12));
    let pk: Vec<_> = ts.iter().map(|&t| (t, kern(&pot, t))).collect();
    let pr: Vec<(f64, &dyn KernelSource)> = pk.iter().map(|(t, k)| (*t, k as &dyn KernelSource)).collect();
    let rep = check_lp_bounded(&pr, x, 1.5, 2.0, 10, 0).unwrap();
    for p in &rep.profiles {
        assert!(p.pass, "r={} slope {:?} window {:?}", p.r, p.fitted_slope, p.slope_window);
    }
    assert!(rep.spread < 2.0 && rep.pass, "{:?}", rep.norms);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn partition_holds_for_random_centers(x in 0usize..1000, r in 0.05f64..20.0) {
        let g = GridSpec::new(3, 10, 7.0).unwrap();
        let x = x % g.len();
        let parts = annulus_partition(&g, x, r);
        let total: usize = parts.iter().map(|p| p.len()).sum();
        prop_assert_eq!(total, g.len());
        for (k, p) in parts.iter().enumerate() {
            for &i in p {
                prop_assert_eq!(annulus_index(g.dist(x, i), r) as usize, k);
            }
        }
    }

    #[test]
    fn upper_dominates_lower(seed in 0u64..1000, p in 1.0f64..3.0, dq in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<Complex64> = (0..20).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let m = SubMatrix::from_fn(4, 5, |i, j| vals[i * 5 + j]);
        let nb = opnorm(&m, 0.3, p, p + dq, seed).unwrap();
        prop_assert!(nb.lower <= nb.upper * (1.0 + 1e-12));
        prop_assert_eq!(nb.uncertain, nb.upper > UNCERTAIN_GAP * nb.lower);
    }
}
