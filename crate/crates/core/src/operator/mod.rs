//! Periodic-grid discretization of H = (-Δ)^{α/2} + V and its complex-time
//! semigroup kernel.

mod discrete;
mod export;
mod grid;
mod kernel;
mod periodic;
mod potential;

pub use discrete::{build_operator, build_operator_with, BuildOptions, DiscreteOperator};
pub use export::{read_matrix_text, write_kernel_text, write_operator_text, TextMatrix};
pub use grid::{GridSpec, DEFAULT_CAP};
pub use kernel::{
    apply_source, weighted_l2_tail, CirculantKernel, KernelMatrix, KernelSource, RadialKernel,
};
pub use periodic::{periodized_gauss, periodized_poisson_1d, spectral_truncation};
pub use potential::PotentialSpec;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random complex vector with unit weighted l2 norm (weight per node `w`).
pub fn random_unit_vector(rng: &mut ChaCha8Rng, len: usize, w: f64) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = (v.iter().map(|x| x.norm_sqr()).sum::<f64>() * w).sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Weighted l2 operator norm estimate by power iteration on A*A, where
/// `apply` is A and `adjoint` is A*.
pub fn power_norm(
    len: usize,
    w: f64,
    rng: &mut ChaCha8Rng,
    iters: usize,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    adjoint: impl Fn(&[Complex64]) -> Vec<Complex64>,
) -> f64 {
    let norm = |v: &[Complex64]| (v.iter().map(|x| x.norm_sqr()).sum::<f64>() * w).sqrt();
    let mut x = random_unit_vector(rng, len, w);
    let mut best = 0.0f64;
    for _ in 0..iters {
        let y = apply(&x);
        best = best.max(norm(&y));
        let mut v = adjoint(&y);
        let nv = norm(&v);
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|c| *c /= nv);
        x = v;
    }
    best
}
