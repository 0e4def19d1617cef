//! Blumenthal–Getoor envelope t / (t^{1/α} + r)^{d+α} and fitted constants.

use rayon::prelude::*;
use serde::Serialize;

use super::free::{kernel_free, KernelQuery, QuadratureSpec};
use crate::complex_time::ComplexTime;
use crate::error::{domain, LabError, Result};
use crate::stats::linear_fit;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (0,2), got {alpha}"));
    }
    Ok(())
}

pub fn bg_bound(alpha: f64, d: usize, t: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t > 0.0 && r >= 0.0) || d == 0 {
        return domain("need t > 0, r >= 0, d >= 1");
    }
    Ok(t / (t.powf(1.0 / alpha) + r).powf(d as f64 + alpha))
}

#[derive(Debug, Clone, Serialize)]
pub struct BgFit {
    pub constant: f64,
    pub worst_t: f64,
    pub worst_r: f64,
    pub points: usize,
}

pub fn fit_bg_constant(alpha: f64, d: usize, grid: &[(f64, f64)], spec: &QuadratureSpec) -> Result<BgFit> {
    check_alpha(alpha)?;
    if grid.is_empty() {
        return Err(LabError::Empty("fit_bg_constant needs grid points".into()));
    }
    let ratios: Vec<f64> = grid
        .par_iter()
        .map(|&(t, r)| {
            let q = KernelQuery::new(alpha, d, ComplexTime::real(t)?, r)?;
            let k = kernel_free(&q, spec)?;
            Ok(k.value.norm() / bg_bound(alpha, d, t, r)?)
        })
        .collect::<Result<_>>()?;
    let mut w = 0;
    for (i, v) in ratios.iter().enumerate() {
        if *v > ratios[w] {
            w = i;
        }
    }
    Ok(BgFit {
        constant: ratios[w],
        worst_t: grid[w].0,
        worst_r: grid[w].1,
        points: grid.len(),
    })
}

/// n x n log-spaced grid over [t0,t1] x [r0,r1] (r0 may be 0: then the first r is 0).
pub fn log_grid(t0: f64, t1: f64, r0: f64, r1: f64, n: usize) -> Vec<(f64, f64)> {
    let ls = |a: f64, b: f64, i: usize| {
        if n == 1 {
            a
        } else {
            a * (b / a).powf(i as f64 / (n - 1) as f64)
        }
    };
    let mut g = Vec::with_capacity(n * (n + 1));
    for i in 0..n {
        let t = ls(t0, t1, i);
        if r0 == 0.0 {
            g.push((t, 0.0));
            for j in 0..n {
                g.push((t, ls(r1 * 1e-3, r1, j)));
            }
        } else {
            for j in 0..n {
                g.push((t, ls(r0, r1, j)));
            }
        }
    }
    g
}

#[derive(Debug, Clone, Serialize)]
pub struct BgStability {
    pub coarse: BgFit,
    pub fine: BgFit,
    pub rel_change: f64,
    pub stable: bool,
}

/// Fits on an n-grid and on the doubled (2n-1)-grid; stable when the sup moves < 5%.
pub fn bg_stability(
    alpha: f64,
    d: usize,
    t_range: (f64, f64),
    r_range: (f64, f64),
    n: usize,
    spec: &QuadratureSpec,
) -> Result<BgStability> {
    let coarse = fit_bg_constant(alpha, d, &log_grid(t_range.0, t_range.1, r_range.0, r_range.1, n), spec)?;
    let fine = fit_bg_constant(
        alpha,
        d,
        &log_grid(t_range.0, t_range.1, r_range.0, r_range.1, 2 * n - 1),
        spec,
    )?;
    let rel_change = (fine.constant - coarse.constant).abs() / coarse.constant;
    Ok(BgStability {
        stable: rel_change < 0.05 && fine.constant.is_finite(),
        coarse,
        fine,
        rel_change,
    })
}

/// Log-log slope of |K(t, r)| over log-spaced r in [r0, r1].
pub fn tail_slope(
    alpha: f64,
    d: usize,
    t: f64,
    r0: f64,
    r1: f64,
    npts: usize,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if npts < 2 || !(r0 > 0.0 && r1 > r0) {
        return domain("tail_slope needs npts >= 2 and 0 < r0 < r1");
    }
    let z = ComplexTime::real(t)?;
    let pts: Vec<(f64, f64)> = (0..npts)
        .into_par_iter()
        .map(|i| {
            let r = r0 * (r1 / r0).powf(i as f64 / (npts - 1) as f64);
            let k = kernel_free(&KernelQuery::new(alpha, d, z, r)?, spec)?;
            Ok((r.ln(), k.value.norm().ln()))
        })
        .collect::<Result<_>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Ok(linear_fit(&xs, &ys).slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!(bg_bound(2.0, 1, 1.0, 1.0).is_err());
        let t: f64 = 0.37;
        let a = 1.3;
        let v = bg_bound(a, 2, t, 0.0).unwrap();
        assert!((v - t.powf(-2.0 / a)).abs() < 1e-13 * v);
        let l: f64 = 4.0;
        let lhs = bg_bound(a, 2, l * t, l.powf(1.0 / a) * 0.8).unwrap();
        let rhs = l.powf(-2.0 / a) * bg_bound(a, 2, t, 0.8).unwrap();
        assert!((lhs - rhs).abs() < 1e-13 * rhs);
    }
}
