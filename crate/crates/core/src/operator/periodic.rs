//! Closed-form torus kernels used as oracles for the grid semigroup.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::GridSpec;

/// (1/L) sinh(2πz/L) / (cosh(2πz/L) - cos(2πx/L)): the α = 1, d = 1 kernel on a circle of length L.
pub fn periodized_poisson_1d(z: Complex64, x: f64, l: f64) -> Complex64 {
    let a = 2.0 * PI * z / l;
    a.sinh() / (a.cosh() - (2.0 * PI * x / l).cos()) / l
}

/// Image sum of the α = 2 kernel, separable over axes; `offset` holds per-axis displacements.
pub fn periodized_gauss(z: Complex64, offset: &[f64], l: f64) -> Complex64 {
    let pre = (4.0 * PI * z).sqrt().inv();
    let mut out = Complex64::new(1.0, 0.0);
    for &x in offset {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0i32.. {
            let mut term = Complex64::new(0.0, 0.0);
            for s in if m == 0 { vec![0.0] } else { vec![m as f64, -(m as f64)] } {
                let y = x + s * l;
                term += (-(y * y) / (4.0 * z)).exp();
            }
            acc += term;
            if m > 2 && term.norm() < 1e-300_f64.max(1e-18 * acc.norm()) {
                break;
            }
        }
        out *= acc * pre;
    }
    out
}

/// e^{-Re z (π/h)^α}: size of the discarded spectrum relative to the origin.
pub fn spectral_truncation(grid: &GridSpec, alpha: f64, re_z: f64) -> f64 {
    (-re_z * (PI / grid.h()).powf(alpha)).exp()
}
