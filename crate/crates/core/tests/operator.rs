use std::f64::consts::PI;

use heatlab::kernel::{kernel_free, KernelQuery, QuadratureSpec};
use heatlab::operator::*;
use heatlab::ComplexTime;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ct(m: f64, th: f64) -> ComplexTime {
    ComplexTime::new(m, th).unwrap()
}

fn bump_op(n: usize, l: f64, alpha: f64) -> DiscreteOperator {
    let g = GridSpec::new(1, n, l).unwrap();
    let v = PotentialSpec::bump(&g, 1.5, l / 8.0);
    build_operator(g, alpha, v).unwrap()
}

#[test]
fn free_spectrum_is_the_symbol() {
    let g = GridSpec::new(2, 8, 3.0).unwrap();
    let op = build_operator(g.clone(), 1.3, PotentialSpec::Zero).unwrap();
    let mut want = Vec::new();
    for k1 in -3i32..=4 {
        for k2 in -3i32..=4 {
            let xi2 = (2.0 * PI / 3.0).powi(2) * (k1 * k1 + k2 * k2) as f64;
            want.push(xi2.powf(0.65));
        }
    }
    want.sort_by(f64::total_cmp);
    for (a, b) in op.eigenvalues().iter().zip(&want) {
        assert!((a - b).abs() < 1e-12 * b.max(1.0));
    }
    // closed-form basis diagonalizes the assembled matrix
    let phi = op.eigenvectors();
    let h = op.assembled();
    let d = phi.transpose() * &h * &phi;
    let gram = phi.transpose() * &phi;
    for i in 0..g.len() {
        for j in 0..g.len() {
            let e = if i == j { op.eigenvalues()[i] } else { 0.0 };
            assert!((d.read(i, j) - e).abs() < 1e-10, "H not diagonal at {i},{j}");
            let id = if i == j { 1.0 } else { 0.0 };
            assert!((gram.read(i, j) - id).abs() < 1e-12);
        }
    }
}

#[test]
fn dense_and_fourier_paths_agree() {
    let g = GridSpec::new(1, 64, 10.0).unwrap();
    let f = build_operator(g.clone(), 1.5, PotentialSpec::Zero).unwrap();
    let opts = BuildOptions {
        force_dense: true,
        ..Default::default()
    };
    let d = build_operator_with(g, 1.5, PotentialSpec::Zero, opts).unwrap();
    assert!(f.is_fourier() && !d.is_fourier());
    let z = ct(0.7, 0.9);
    let a = f.semigroup_kernel(&z);
    let b = d.semigroup_kernel(&z);
    assert!(a.max_abs_diff(&b) < 1e-10 * a.max_abs());
    let c = KernelMatrix::from_source(&f.circulant_kernel(&z).unwrap());
    assert!(a.max_abs_diff(&c) < 1e-13 * a.max_abs());
}

#[test]
fn laplacian_matches_periodized_gaussian() {
    let g = GridSpec::new(2, 32, 10.0).unwrap();
    let op = build_operator(g.clone(), 2.0, PotentialSpec::Zero).unwrap();
    let t = 0.5;
    // discarded spectrum e^{-t (pi/h)^2} and wrap e^{-(L/2)^2/4t} both tiny
    assert!(spectral_truncation(&g, 2.0, t) < 1e-10);
    assert!((-(25.0f64) / (4.0 * t)).exp() < 1e-5);
    let k = op.circulant_kernel(&ComplexTime::real(t).unwrap()).unwrap();
    let c = g.center();
    let h = g.h();
    let peak = periodized_gauss(Complex64::new(t, 0.0), &[0.0, 0.0], 10.0).re;
    for j in 0..g.len() {
        let o = g.offset(c, j);
        let x = [o[0] as f64 * h, o[1] as f64 * h];
        let want = periodized_gauss(Complex64::new(t, 0.0), &x, 10.0);
        assert!((k.entry(c, j) - want).norm() < 1e-6 * peak);
    }
}

#[test]
fn periodized_poisson_matches_grid() {
    let g = GridSpec::new(1, 1024, 64.0).unwrap();
    let op = build_operator(g.clone(), 1.0, PotentialSpec::Zero).unwrap();
    let z = ct(1.0, PI / 4.0);
    assert!(spectral_truncation(&g, 1.0, z.re()) < 1e-15);
    let k = op.circulant_kernel(&z).unwrap();
    for j in (0..1024).step_by(37) {
        let x = g.offset(0, j)[0] as f64 * g.h();
        let want = periodized_poisson_1d(z.to_complex(), x, 64.0);
        assert!((k.entry(0, j) - want).norm() < 1e-12);
    }
}

#[test]
fn row_sums_are_one_for_free_operator() {
    let g = GridSpec::new(2, 16, 5.0).unwrap();
    let op = build_operator(g.clone(), 0.8, PotentialSpec::Zero).unwrap();
    for t in [0.01, 0.3, 4.0] {
        let k = op.semigroup_kernel(&ComplexTime::real(t).unwrap());
        for i in [0, 17, 200] {
            let s: Complex64 = (0..g.len()).map(|j| k.entry(i, j)).sum::<Complex64>() * g.weight();
            assert!((s - 1.0).norm() < 1e-12);
        }
    }
}

#[test]
fn central_row_matches_free_kernel() {
    let g = GridSpec::new(1, 1024, 64.0).unwrap();
    let alpha = 1.5;
    let op = build_operator(g.clone(), alpha, PotentialSpec::Zero).unwrap();
    let z = ComplexTime::real(0.5).unwrap();
    let k = op.circulant_kernel(&z).unwrap();
    let c = g.center();
    let spec = QuadratureSpec::default();
    for m in [0usize, 3, 10, 40] {
        let r = m as f64 * g.h();
        let q = KernelQuery::new(alpha, 1, z, r).unwrap();
        let free = kernel_free(&q, &spec).unwrap().value;
        let grid = k.entry(c, c + m);
        assert!((grid - free).norm() < 1e-3 * free.norm(), "m={m}: {grid} vs {free}");
    }
}

#[test]
fn hardy_raises_the_spectrum() {
    let g = GridSpec::new(2, 12, 6.0).unwrap();
    let free = build_operator(g.clone(), 1.0, PotentialSpec::Zero).unwrap();
    let opts = BuildOptions {
        assert_nonneg: true,
        ..Default::default()
    };
    let hardy = build_operator_with(
        g.clone(),
        1.0,
        PotentialSpec::Hardy { a: 0.5, cutoff: None },
        opts,
    )
    .unwrap();
    for (a, b) in hardy.eigenvalues().iter().zip(free.eigenvalues()) {
        assert!(a + 1e-10 >= *b);
    }
    // strongly negative coupling breaks the asserted form bound
    let bad = build_operator_with(g, 1.0, PotentialSpec::Hardy { a: -50.0, cutoff: None }, opts);
    assert!(matches!(bad, Err(heatlab::LabError::Assembly(_))));
}

#[test]
fn hardy_needs_alpha_below_d() {
    let g = GridSpec::new(1, 16, 6.0).unwrap();
    assert!(build_operator(g, 1.2, PotentialSpec::Hardy { a: 1.0, cutoff: None }).is_err());
}

#[test]
fn unitary_flow_preserves_norm() {
    let g = GridSpec::new(1, 256, 20.0).unwrap();
    let free = build_operator(g.clone(), 1.0, PotentialSpec::Zero).unwrap();
    assert!(free.unitary_check(0.0, 1) < 1e-12);
    assert!(free.unitary_check(1.0, 2) < 1e-9);
    let g2 = GridSpec::new(2, 16, 8.0).unwrap();
    let hardy = build_operator(g2, 1.0, PotentialSpec::Hardy { a: 0.7, cutoff: None }).unwrap();
    assert!(hardy.unitary_check(5.0, 3) < 1e-9);
}

#[test]
fn kernel_symmetry_and_reality() {
    let op = bump_op(64, 12.0, 1.0);
    let k = op.semigroup_kernel(&ct(1.3, -0.8));
    assert!(k.symmetry_defect() < 1e-9 * k.max_abs());
    let kt = op.semigroup_kernel(&ComplexTime::real(0.4).unwrap());
    let mut im = 0.0f64;
    for i in 0..64 {
        for j in 0..64 {
            im = im.max(kt.entry(i, j).im.abs());
        }
    }
    assert!(im < 1e-10);
}

#[test]
fn composition_is_the_semigroup_law() {
    let op = bump_op(128, 16.0, 1.5);
    let z1 = ct(0.4, 0.7);
    let z2 = ct(0.9, -1.2);
    let lhs = op.semigroup_kernel(&z1).compose(&op.semigroup_kernel(&z2)).unwrap();
    let rhs = op.semigroup_kernel(&z1.add(&z2).unwrap());
    assert!(lhs.max_abs_diff(&rhs) < 1e-8 * rhs.max_abs().max(1.0));
}

#[test]
fn conjugation_symmetry() {
    let op = bump_op(64, 10.0, 0.7);
    let z = ct(0.8, 1.1);
    let a = op.semigroup_kernel(&z.conj());
    let b = op.semigroup_kernel(&z).conj();
    assert!(a.max_abs_diff(&b) < 1e-9);
}

#[test]
fn contraction_on_weighted_l2() {
    let op = bump_op(128, 16.0, 1.2);
    let w = op.grid().weight();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (m, th) in [(0.1, 0.0), (0.5, 1.2), (2.0, -1.4)] {
        let z = ct(m, th);
        let zb = z.conj();
        let n = power_norm(128, w, &mut rng, 60, |f| op.apply_semigroup(&z, f), |f| {
            op.apply_semigroup(&zb, f)
        });
        assert!(n <= 1.0 + 1e-9, "norm {n} at z = {m} e^(i{th})");
        // the lambda_min mode is reached
        let want = (-z.re() * op.lambda_min()).exp();
        assert!((n - want).abs() < 1e-3);
    }
}

#[test]
fn trotter_domination_for_alpha_at_most_one() {
    for alpha in [0.5, 1.0] {
        let g = GridSpec::new(1, 128, 16.0).unwrap();
        let free = build_operator(g.clone(), alpha, PotentialSpec::Zero).unwrap();
        let v = PotentialSpec::bump(&g, 2.0, 3.0);
        let pot = build_operator(g, alpha, v).unwrap();
        for t in [0.05, 0.5, 3.0] {
            let z = ComplexTime::real(t).unwrap();
            let k0 = free.semigroup_kernel(&z);
            let kv = pot.semigroup_kernel(&z);
            for i in 0..128 {
                for j in 0..128 {
                    let a = kv.entry(i, j).norm();
                    let b = k0.entry(i, j).re;
                    assert!(a <= b * (1.0 + 1e-6) + 1e-14, "alpha {alpha} t {t} ({i},{j}): {a} > {b}");
                }
            }
        }
    }
}

#[test]
fn tail_functional() {
    let g = GridSpec::new(1, 64, 8.0).unwrap();
    let op = build_operator(g.clone(), 1.0, PotentialSpec::Zero).unwrap();
    let z = ct(0.5, 0.3);
    let k = op.semigroup_kernel(&z);
    let full = weighted_l2_tail(&k, 0.0).unwrap();
    let col: f64 = (0..64).map(|x| k.entry(x, 5).norm_sqr()).sum::<f64>() * g.weight();
    assert!((full - col).abs() < 1e-12 * col);
    assert!(weighted_l2_tail(&k, 4.0).is_err());
    let circ = op.circulant_kernel(&z).unwrap();
    let a = weighted_l2_tail(&k, 1.3).unwrap();
    let b = weighted_l2_tail(&circ, 1.3).unwrap();
    assert!((a - b).abs() < 1e-12 * a);
}

#[test]
fn poisson_tail_matches_closed_form_integral() {
    // free-space tail 2 int_r^inf (t / pi (t^2 + x^2))^2 dx = (2 / pi^2 t) I(r/t)
    let t = 3.0;
    let tail = |r: f64| {
        let rho = r / t;
        2.0 / (PI * PI * t) * (PI / 4.0 - rho / (2.0 * (1.0 + rho * rho)) - rho.atan() / 2.0)
    };
    // h/t small enough for the midpoint sum, L/t large enough for the images
    let g = GridSpec::new(1, 4096, 1024.0).unwrap();
    let op = build_operator(g.clone(), 1.0, PotentialSpec::Zero).unwrap();
    let k = op.circulant_kernel(&ComplexTime::real(t).unwrap()).unwrap();
    for r in [1.5, 3.0, 6.0] {
        let r = g.snap_midpoint(r);
        let got = weighted_l2_tail(&k, r).unwrap();
        let want = tail(r);
        assert!((got - want).abs() < 1e-3 * want, "r={r}: {got} vs {want}");
    }
}

#[test]
fn text_round_trip() {
    let op = bump_op(16, 4.0, 1.0);
    let k = op.semigroup_kernel(&ct(0.3, 0.4));
    let mut buf = Vec::new();
    write_kernel_text(&k, &mut buf).unwrap();
    let back = read_matrix_text(&mut buf.as_slice()).unwrap().into_kernel().unwrap();
    assert_eq!(back.max_abs_diff(&k), 0.0);
    assert_eq!(back.z(), k.z());

    let mut buf = Vec::new();
    write_operator_text(&op, &mut buf).unwrap();
    let m = read_matrix_text(&mut buf.as_slice()).unwrap();
    assert_eq!(m.kind, "operator");
    assert_eq!(m.alpha, Some(1.0));
    assert!(m.into_kernel().is_err());

    let broken = b"# heatlab matrix v1\nkind kernel\ngrid 1 16 4 1\nalpha none\nz none\nrows 16 cols 16 complex 1\n1 2\n";
    let err = read_matrix_text(&mut broken.as_slice()).err().unwrap();
    assert!(err.to_string().contains("line 7"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn semigroup_law_random_times(m1 in 0.05f64..2.0, t1 in -1.4f64..1.4, m2 in 0.05f64..2.0, t2 in -1.4f64..1.4) {
        let op = bump_op(32, 6.0, 1.3);
        let z1 = ct(m1, t1);
        let z2 = ct(m2, t2);
        let lhs = op.semigroup_kernel(&z1).compose(&op.semigroup_kernel(&z2)).unwrap();
        let rhs = op.semigroup_kernel(&z1.add(&z2).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-8 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn conjugation_random_times(m in 0.05f64..3.0, t in -1.4f64..1.4) {
        let op = bump_op(32, 6.0, 0.9);
        let z = ct(m, t);
        prop_assert!(op.semigroup_kernel(&z.conj()).max_abs_diff(&op.semigroup_kernel(&z).conj()) < 1e-9);
    }
}
