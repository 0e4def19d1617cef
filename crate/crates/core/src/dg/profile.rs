use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::annulus::{annulus_partition, outer_radius};
use super::norms::{opnorm, NormBound, SubMatrix};
use crate::error::{domain, LabError, Result};
use crate::operator::KernelSource;
use crate::stats::linear_fit;

pub const DEFAULT_SLOPE_TOL: f64 = 0.1;

fn default_slope_tol() -> f64 {
    DEFAULT_SLOPE_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plain,
    Restricted,
    Dual,
}

/// Exponents of a dyadic (p, q, sigma) estimate with g(λ) = (1+λ)^{-β}.
/// `sigma = inf` is accepted and means d/σ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DGParams {
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub beta: f64,
    pub variant: Variant,
    #[serde(default = "default_slope_tol")]
    pub slope_tol: f64,
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

impl DGParams {
    pub fn new(p: f64, q: f64, sigma: f64, beta: f64, variant: Variant) -> Self {
        DGParams {
            p,
            q,
            sigma,
            beta,
            variant,
            slope_tol: DEFAULT_SLOPE_TOL,
        }
    }

    /// Checks exponent ranges and the variant's constraint on beta.
    pub fn validate(&self, d: usize) -> Result<()> {
        self.validate_ranges()?;
        let df = d as f64;
        let (need, what) = match self.variant {
            Variant::Plain => (df * (inv(self.sigma) + inv(self.q)), "d(1/sigma + 1/q)"),
            Variant::Restricted => (df * (inv(self.p) + inv(self.sigma)), "d(1/p + 1/sigma)"),
            Variant::Dual => {
                let pc = super::norms::conjugate_exponent(self.p);
                let same = self.q == pc || (self.q - pc).abs() <= 1e-12 * pc;
                if !(self.p <= 2.0 && same) {
                    return domain(format!(
                        "dual variant needs p in [1,2] and q = p', got p={}, q={}",
                        self.p, self.q
                    ));
                }
                (df * (0.5 + inv(pc)), "d(1/2 + 1/p')")
            }
        };
        if !(self.beta > need) {
            return domain(format!("beta = {} must exceed {} = {}", self.beta, what, need));
        }
        Ok(())
    }

    /// Ranges only, without the beta constraint (relaxed-regime diagnostics).
    pub fn validate_ranges(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.q >= self.p) {
            return domain(format!("need 1 <= p <= q, got p={}, q={}", self.p, self.q));
        }
        if !(self.sigma > 0.0) {
            return domain(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return domain(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.slope_tol >= 0.0) {
            return domain("slope_tol must be nonnegative");
        }
        Ok(())
    }

    pub fn d_over_sigma(&self, d: usize) -> f64 {
        d as f64 * inv(self.sigma)
    }

    /// β - d/σ, the decay exponent of the annulus norms.
    pub fn decay_exponent(&self, d: usize) -> f64 {
        self.beta - self.d_over_sigma(d)
    }

    /// r^{-d(1/p-1/q)}
    pub fn radius_factor(&self, d: usize, r: f64) -> f64 {
        r.powf(-(d as f64) * (inv(self.p) - inv(self.q)))
    }

    /// r^{-d(1/p-1/q)} g(2^k) 2^{kd/σ}
    pub fn profile_factor(&self, d: usize, r: f64, k: u32) -> f64 {
        let two_k = 2f64.powi(k as i32);
        self.radius_factor(d, r) * (1.0 + two_k).powf(-self.beta) * two_k.powf(self.d_over_sigma(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusNorm {
    pub k: u32,
    pub nodes: usize,
    pub outer_radius: f64,
    pub norm: NormBound,
    /// norm.upper / (r^{-d(1/p-1/q)} g(2^k) 2^{kd/σ})
    pub normalized: f64,
    /// Outer radius strictly inside the half-diameter; only these enter C_DG and the slope.
    pub in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DGReport {
    pub center: usize,
    pub r: f64,
    pub params: DGParams,
    pub per_k: Vec<AnnulusNorm>,
    pub fitted_cdg: f64,
    pub fitted_slope: Option<f64>,
    pub expected_slope: f64,
    pub slope_window: Vec<u32>,
    pub uncertain: bool,
    pub pass: bool,
}

impl DGReport {
    pub fn per_k_norms(&self) -> Vec<(u32, f64)> {
        self.per_k.iter().map(|a| (a.k, a.norm.upper)).collect()
    }

    /// One line per k: k nodes outer_radius lower upper normalized in_fit exact uncertain.
    pub fn flat_records(&self) -> Vec<String> {
        self.per_k
            .iter()
            .map(|a| {
                format!(
                    "{},{},{:.15e},{:.15e},{:.15e},{:.15e},{},{},{}",
                    a.k,
                    a.nodes,
                    a.outer_radius,
                    a.norm.lower,
                    a.norm.upper,
                    a.normalized,
                    a.in_fit as u8,
                    a.norm.exact as u8,
                    a.norm.uncertain as u8
                )
            })
            .collect()
    }

    pub const FLAT_HEADER: &'static str =
        "k,nodes,outer_radius,norm_lower,norm_upper,normalized,in_fit,exact,uncertain";
}

/// Asymptotic regression window: k >= max(2, ceil(kfit/2)) among fit rows with nonzero norm.
pub fn slope_fit(per_k: &[AnnulusNorm]) -> (Option<f64>, Vec<u32>) {
    let kfit = per_k.iter().filter(|a| a.in_fit).map(|a| a.k).max().unwrap_or(0);
    let lo = 2.max((kfit + 1) / 2);
    let pts: Vec<&AnnulusNorm> = per_k
        .iter()
        .filter(|a| a.in_fit && a.k >= lo && a.norm.upper > 0.0)
        .collect();
    let window: Vec<u32> = pts.iter().map(|a| a.k).collect();
    if pts.len() < 2 {
        return (None, window);
    }
    let xs: Vec<f64> = pts.iter().map(|a| a.k as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|a| a.norm.upper.log2()).collect();
    (Some(linear_fit(&xs, &ys).slope), window)
}

/// Masked norms of 1_{B_x(r0)} K 1_{A_2(x,r0,k)} for k = 0..=kmax, with normalization by `params`
/// at radius r (r = r0 for the plain profile).
pub fn measure_annuli(
    src: &dyn KernelSource,
    x: usize,
    r0: f64,
    p: f64,
    q: f64,
    kmax: u32,
    seed: u64,
) -> Result<Vec<(u32, usize, f64, NormBound)>> {
    let grid = src.grid();
    let parts = annulus_partition(grid, x, r0);
    let ball = parts.first().cloned().unwrap_or_default();
    let w = grid.weight();
    let last = (kmax as usize).min(parts.len().saturating_sub(1));
    (0..=last)
        .into_par_iter()
        .map(|k| {
            let cols = &parts[k];
            let sub = SubMatrix::from_source(src, &ball, cols);
            let nb = opnorm(&sub, w, p, q, seed.wrapping_add(k as u64))?;
            Ok((k as u32, cols.len(), outer_radius(r0, k as u32), nb))
        })
        .collect()
}

pub fn dg_profile(
    src: &dyn KernelSource,
    x: usize,
    r: f64,
    params: &DGParams,
    kmax: u32,
    seed: u64,
) -> Result<DGReport> {
    let grid = src.grid();
    params.validate(grid.d)?;
    profile_unchecked(src, x, r, params, kmax, seed)
}

/// dg_profile without the variant's beta constraint.
pub fn profile_unchecked(
    src: &dyn KernelSource,
    x: usize,
    r: f64,
    params: &DGParams,
    kmax: u32,
    seed: u64,
) -> Result<DGReport> {
    let grid = src.grid();
    params.validate_ranges()?;
    if !(r > 0.0) || x >= grid.len() {
        return domain(format!("need r > 0 and a grid node, got r={r}, x={x}"));
    }
    let rows = measure_annuli(src, x, r, params.p, params.q, kmax, seed)?;
    if rows.iter().filter(|(k, n, _, _)| *k >= 2 && *n > 0).count() == 0 {
        return Err(LabError::Degenerate(format!(
            "no nonempty annulus beyond k=1 (r={r}, kmax={kmax})"
        )));
    }
    let half = grid.half_diameter();
    let d = grid.d;
    let per_k: Vec<AnnulusNorm> = rows
        .into_iter()
        .map(|(k, nodes, outer, norm)| AnnulusNorm {
            k,
            nodes,
            outer_radius: outer,
            norm,
            normalized: norm.upper / params.profile_factor(d, r, k),
            in_fit: outer < half && nodes > 0,
        })
        .collect();
    let fitted_cdg = per_k
        .iter()
        .filter(|a| a.in_fit)
        .map(|a| a.normalized)
        .fold(0.0, f64::max);
    let (fitted_slope, slope_window) = slope_fit(&per_k);
    let expected_slope = -params.decay_exponent(d);
    let pass = fitted_cdg.is_finite()
        && fitted_slope.map_or(true, |s| s <= expected_slope + params.slope_tol);
    Ok(DGReport {
        center: x,
        r,
        params: *params,
        uncertain: per_k.iter().any(|a| a.norm.uncertain),
        per_k,
        fitted_cdg,
        fitted_slope,
        expected_slope,
        slope_window,
        pass,
    })
}
