use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_ur};

use super::config::ExperimentConfig;
use crate::complex_time::ComplexTime;
use crate::dg::{DGParams, DGReport, Variant};
use crate::error::{LabError, Result};
use crate::operator::{
    build_operator, periodized_gauss, periodized_poisson_1d, DiscreteOperator, GridSpec, KernelSource,
};
use crate::pl::gamma_eps;

pub struct Setup {
    pub grid: GridSpec,
    pub op: DiscreteOperator,
    pub x: usize,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let grid = cfg.grid_spec()?;
        let pot = cfg.potential_spec(&grid);
        let x = cfg.center_node(&grid);
        let op = build_operator(grid.clone(), cfg.alpha, pot)?;
        Ok(Setup { grid, op, x })
    }

    pub fn kernel(&self, z: &ComplexTime) -> Box<dyn KernelSource> {
        self.op.kernel_source(z)
    }
}

/// 1 - |θ|/γ_ε(θ)
pub fn angle_factor(epsilon: f64, theta: f64) -> Result<f64> {
    Ok(1.0 - theta.abs() / gamma_eps(epsilon, theta)?)
}

pub fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Largest over smallest of positive values; infinite if any value is zero.
pub fn spread(vals: &[f64]) -> f64 {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(0.0, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

pub fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    v
}

/// Configured zetas, or {0, max((α-1)/α, 0), 1}.
pub fn zetas(cfg: &ExperimentConfig) -> Vec<f64> {
    if cfg.zetas.is_empty() {
        dedup_sorted(vec![0.0, ((cfg.alpha - 1.0) / cfg.alpha).max(0.0), 1.0])
    } else {
        cfg.zetas.clone()
    }
}

/// Closed-form torus kernel of the grid model, available for V = 0 with
/// α = 1 in d = 1 or α = 2 in any d.
pub struct TorusOracle {
    grid: GridSpec,
    z: ComplexTime,
    alpha: f64,
}

impl TorusOracle {
    pub fn new(cfg: &ExperimentConfig, grid: &GridSpec, z: ComplexTime) -> Option<Self> {
        let ok = cfg.is_free() && ((cfg.alpha == 1.0 && grid.d == 1) || cfg.alpha == 2.0);
        ok.then(|| TorusOracle {
            grid: grid.clone(),
            z,
            alpha: cfg.alpha,
        })
    }

    /// Sup-norm bound on grid kernel minus torus kernel: the image-free
    /// spectral sum over modes beyond the Nyquist band.
    pub fn truncation_bound(&self) -> f64 {
        spectral_tail_bound(&self.grid, self.alpha, self.z.re())
    }
}

impl KernelSource for TorusOracle {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn entry(&self, i: usize, j: usize) -> Complex64 {
        let z = self.z.to_complex();
        let l = self.grid.box_length;
        let h = self.grid.h();
        let o = self.grid.offset(i, j);
        if self.alpha == 1.0 {
            periodized_poisson_1d(z, o[0] as f64 * h, l)
        } else {
            let off: Vec<f64> = o[..self.grid.d].iter().map(|m| *m as f64 * h).collect();
            periodized_gauss(z, &off, l)
        }
    }

    fn translation_invariant(&self) -> bool {
        true
    }

    fn time(&self) -> Option<ComplexTime> {
        Some(self.z)
    }
}

/// (1/L^d) sum over lattice frequencies outside the grid band of e^{-a|ξ|^α},
/// bounded axis by axis with integrals from ξ0 = π/h - 2π/L.
pub fn spectral_tail_bound(grid: &GridSpec, alpha: f64, a: f64) -> f64 {
    let l = grid.box_length;
    let xi0 = PI / grid.h() - 2.0 * PI / l;
    let s = 1.0 / alpha;
    let tail = gamma(s) * gamma_ur(s, a * xi0.powf(alpha)) / (PI * alpha * a.powf(s));
    let full = 1.0 / l + gamma(1.0 + s) / (PI * a.powf(s));
    grid.d as f64 * tail * full.powi(grid.d as i32 - 1)
}

/// Real-time dyadic profile at r_t = t^{1/α}, the assumption every complex-time
/// estimate starts from.
pub fn real_profile(
    setup: &Setup,
    cfg: &ExperimentConfig,
    t: f64,
    p: f64,
    q: f64,
    sigma: f64,
    variant: Variant,
) -> Result<DGReport> {
    let e = cfg.exponents()?;
    let mut params = DGParams::new(p, q, sigma, e.beta, variant);
    params.slope_tol = cfg.tolerances.slope;
    let z = ComplexTime::real(t)?;
    let src = setup.kernel(&z);
    crate::dg::dg_profile(src.as_ref(), setup.x, t.powf(1.0 / cfg.alpha), &params, cfg.kmax, cfg.seed)
}

pub fn config_error<T>(field: &str, msg: impl Into<String>) -> Result<T> {
    Err(LabError::Config {
        field: field.to_string(),
        msg: msg.into(),
    })
}

/// (α ∈ (0,2), V ≥ 0) gate shared by the pointwise and L² corollaries.
pub fn require_subordinate(cfg: &ExperimentConfig, grid: &GridSpec) -> Result<()> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 2.0) {
        return config_error("alpha", format!("needs alpha in (0, 2), got {}", cfg.alpha));
    }
    if !cfg.potential_spec(grid).is_nonnegative() {
        return config_error("potential", "needs V >= 0");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_bound_dominates_dropped_modes() {
        // direct sum of the omitted 1-d modes for a coarse grid
        let g = GridSpec::new(1, 64, 16.0).unwrap();
        let a = 0.3;
        let l = g.box_length;
        let direct: f64 = (32..100000)
            .map(|k| 2.0 * (-a * 2.0 * PI * k as f64 / l).exp() / l)
            .sum();
        let b = spectral_tail_bound(&g, 1.0, a);
        assert!(b >= direct && b < 3.0 * direct, "{b} vs {direct}");
    }
}
