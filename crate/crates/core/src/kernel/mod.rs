//! Free-space kernels: numerical radial inversion, closed forms, and the
//! Blumenthal–Getoor envelope.

mod bessel;
mod bg;
mod fixtures;
mod free;
mod gauss;
mod witness;

pub use bessel::{bessel_j0, RadialProfile};
pub use bg::{bg_bound, bg_stability, fit_bg_constant, log_grid, tail_slope, BgFit, BgStability};
pub use fixtures::{parse_bessel_table, parse_kernel_table, KernelReference};
pub use free::{
    kernel_at_origin, kernel_free, kernel_gauss, kernel_poisson, poisson_constant, KernelQuery,
    KernelValue, QuadratureSpec,
};
pub use witness::KernelWitness;
