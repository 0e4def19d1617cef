use serde::Serialize;

use super::annulus::{annulus_index, annulus_partition};
use super::profile::DGParams;
use crate::error::{domain, Result};
use crate::operator::KernelSource;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub x: usize,
    pub y: usize,
    pub value: f64,
    pub bound: f64,
}

/// Both directions of the annulus-norm / pointwise-envelope equivalence for
/// p = 1, q = ∞, with γ = β - d/σ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseReport {
    pub gamma: f64,
    /// C_DG of the 1 -> ∞ annulus profile (fitted, or supplied).
    pub c_dg: f64,
    /// Smallest C with |K(x,y)| <= C r^{-d} (1 + |x-y|/r)^{-γ} on the scanned pairs.
    pub c_pointwise: f64,
    /// C_DG implied by the pointwise envelope through min ball-annulus distances.
    pub c_dg_from_pointwise: f64,
    /// c_dg / c_pointwise (direction (a) forces >= 1).
    pub const_a: Option<f64>,
    /// c_dg_from_pointwise / c_dg (direction (b) forces >= 1).
    pub const_b: Option<f64>,
    pub violation_a: Option<Violation>,
    pub violation_b: Option<Violation>,
    pub pass_a: bool,
    pub pass_b: bool,
}

/// Per-annulus sup of |K(y, z)| over y in B_x(r), z in A_2(x, r, k), with the arg max.
fn annulus_sups(src: &dyn KernelSource, x: usize, r: f64) -> Vec<(f64, usize, usize, usize)> {
    let grid = src.grid();
    let parts = annulus_partition(grid, x, r);
    let ball = parts[0].clone();
    parts
        .iter()
        .map(|cols| {
            let mut best = (0.0, x, x, cols.len());
            for &y in &ball {
                for &z in cols {
                    let v = src.entry(y, z).norm();
                    if v > best.0 {
                        best = (v, y, z, cols.len());
                    }
                }
            }
            best
        })
        .collect()
}

/// `centers` are the ball centers scanned; `c_dg` overrides the fitted constant
/// (used to test a kernel against a reference profile).
pub fn pointwise_equivalence_check(
    src: &dyn KernelSource,
    centers: &[usize],
    r: f64,
    beta: f64,
    sigma: f64,
    c_dg: Option<f64>,
) -> Result<PointwiseReport> {
    let grid = src.grid();
    let d = grid.d;
    let params = DGParams::new(1.0, f64::INFINITY, sigma, beta, super::profile::Variant::Plain);
    params.validate_ranges()?;
    if centers.is_empty() || !(r > 0.0) {
        return domain("need at least one center and r > 0");
    }
    let gamma = params.decay_exponent(d);
    let half = grid.half_diameter();
    let rd = r.powi(d as i32);
    let nn = grid.len();

    // annulus sups per center, restricted to annuli inside the half-diameter
    let sups: Vec<Vec<(f64, usize, usize, usize)>> =
        centers.iter().map(|&x| annulus_sups(src, x, r)).collect();
    let in_fit = |k: usize| r * 2f64.powi(k as i32) < half;
    let mut fitted = 0.0f64;
    for s in &sups {
        for (k, a) in s.iter().enumerate() {
            if in_fit(k) && a.3 > 0 {
                fitted = fitted.max(a.0 / params.profile_factor(d, r, k as u32));
            }
        }
    }
    let c_dg = c_dg.unwrap_or(fitted);

    // (a): derived envelope C_DG r^{-d}(1+ρ)^{-γ} against every scanned pair
    let envelope = |dist: f64| r.powi(-(d as i32)) * (1.0 + dist / r).powf(-gamma);
    let mut c_pw = 0.0f64;
    let mut violation_a: Option<Violation> = None;
    for &x in centers {
        for y in 0..nn {
            let dist = grid.dist(x, y);
            if !in_fit(annulus_index(dist, r) as usize) {
                continue;
            }
            let v = src.entry(x, y).norm();
            let e = envelope(dist);
            c_pw = c_pw.max(v / e);
            let bound = c_dg * e;
            if v > bound * (1.0 + 1e-12) {
                let worse = violation_a.map_or(true, |w| v / bound > w.value / w.bound);
                if worse {
                    violation_a = Some(Violation { x, y, value: v, bound });
                }
            }
        }
    }

    // (b): derived annulus bounds from the pointwise constant, using the
    // smallest ball-annulus distance (2^{k-1} - 1)^+ r
    let mut violation_b: Option<Violation> = None;
    let mut c_from_pw = 0.0f64;
    for (ci, s) in sups.iter().enumerate() {
        for (k, a) in s.iter().enumerate() {
            if !in_fit(k) || a.3 == 0 {
                continue;
            }
            let gap = if k >= 1 {
                (2f64.powi(k as i32 - 1) - 1.0).max(0.0)
            } else {
                0.0
            };
            let bound = c_pw / rd * (1.0 + gap).powf(-gamma);
            c_from_pw = c_from_pw.max(bound / params.profile_factor(d, r, k as u32));
            if a.0 > bound * (1.0 + 1e-12) {
                violation_b = Some(Violation {
                    x: a.1,
                    y: a.2,
                    value: a.0,
                    bound,
                });
                let _ = ci;
            }
        }
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { Some(a / b) } else { None };
    Ok(PointwiseReport {
        gamma,
        c_dg,
        c_pointwise: c_pw,
        c_dg_from_pointwise: c_from_pw,
        const_a: ratio(c_dg, c_pw),
        const_b: ratio(c_from_pw, c_dg),
        pass_a: violation_a.is_none(),
        pass_b: violation_b.is_none(),
        violation_a,
        violation_b,
    })
}
