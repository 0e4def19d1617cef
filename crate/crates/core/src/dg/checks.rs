//! Executable forms of the hypercontractivity, two-radius, dual and L^p-boundedness statements.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::annulus::ball_nodes;
use super::norms::{conjugate_exponent, opnorm, NormBound, SubMatrix};
use super::profile::{measure_annuli, profile_unchecked, DGParams, DGReport, Variant};
use crate::error::{domain, LabError, Result};
use crate::operator::KernelSource;

/// Largest/smallest fitted constant allowed across an r-sweep.
pub const STABILITY_FACTOR: f64 = 2.0;
/// Slack allowed between the two-radius constant and C_DG.
pub const TWO_RADIUS_SLACK: f64 = 16.0;
/// Full matrices above this size go through the translation-invariant shortcut.
pub const FULL_MATRIX_LIMIT: usize = 2048;

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

fn spread(vals: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = vals.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > 0.0 {
        hi / lo
    } else if hi == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

fn lp_abs(v: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        v.fold(0.0, f64::max)
    } else {
        v.map(|a| a.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// ||T||_{p->q} of the whole kernel. Dense up to FULL_MATRIX_LIMIT nodes; beyond that
/// only exact corners of translation-invariant kernels (one column, one row, or the DFT).
pub fn full_norm(src: &dyn KernelSource, p: f64, q: f64, seed: u64) -> Result<NormBound> {
    let grid = src.grid();
    let nn = grid.len();
    if nn <= FULL_MATRIX_LIMIT {
        let all: Vec<usize> = (0..nn).collect();
        return opnorm(&SubMatrix::from_source(src, &all, &all), grid.weight(), p, q, seed);
    }
    if !src.translation_invariant() {
        return Err(LabError::Grid(format!(
            "full norm of a {nn}-node kernel needs translation invariance"
        )));
    }
    let w = grid.weight();
    let value = if p == 1.0 {
        lp_abs((0..nn).map(|i| src.entry(i, 0).norm()), q) * w.powf(inv(q))
    } else if q.is_infinite() {
        let pc = conjugate_exponent(p);
        lp_abs((0..nn).map(|j| src.entry(0, j).norm()), pc) * w.powf(1.0 - inv(p))
    } else if p == 2.0 && q == 2.0 {
        // eigenvalues of a circulant are the DFT of its first row
        let d = grid.d;
        let n = grid.n as f64;
        let row: Vec<(Complex64, [usize; 3])> =
            (0..nn).map(|j| (src.entry(0, j), grid.multi_index(j))).collect();
        let mut best = 0.0f64;
        for k in 0..nn {
            let km = grid.multi_index(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, m) in &row {
                let phase: f64 = (0..d).map(|a| (km[a] * m[a]) as f64).sum::<f64>() * 2.0 * PI / n;
                acc += c * Complex64::from_polar(1.0, phase);
            }
            best = best.max(acc.norm());
        }
        best * w
    } else {
        return Err(LabError::Grid(format!(
            "non-exact ({p},{q}) norm on a {nn}-node kernel is out of budget"
        )));
    };
    Ok(NormBound {
        lower: value,
        upper: value,
        exact: true,
        uncertain: false,
    })
}

/// ||1_{B_x(r)} T||_{p->q}, all columns kept.
pub fn localized_norm(src: &dyn KernelSource, x: usize, r: f64, p: f64, q: f64, seed: u64) -> Result<NormBound> {
    let grid = src.grid();
    let ball = ball_nodes(grid, x, r);
    let all: Vec<usize> = (0..grid.len()).collect();
    opnorm(&SubMatrix::from_source(src, &ball, &all), grid.weight(), p, q, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusNorm {
    pub r: f64,
    pub norm: NormBound,
    /// C_DG r^{-d(1/p-1/q)}
    pub rhs: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypercontractiveReport {
    pub p: f64,
    pub q: f64,
    pub c_dg: f64,
    pub rows: Vec<RadiusNorm>,
    pub spread: f64,
    pub pass: bool,
}

/// `kernels` pairs each radius r with T_r. Checks ||T_r||_{p->q} <= C C_DG r^{-d(1/p-1/q)}
/// with C stable over the sweep; `localized` measures ||1_{B_x(r)} T_r|| around x instead.
pub fn check_hypercontractive(
    kernels: &[(f64, &dyn KernelSource)],
    params: &DGParams,
    c_dg: f64,
    localized: Option<usize>,
    seed: u64,
) -> Result<HypercontractiveReport> {
    if kernels.is_empty() {
        return domain("no radii supplied");
    }
    if !(c_dg > 0.0 && c_dg.is_finite()) {
        return domain(format!("C_DG must be positive and finite, got {c_dg}"));
    }
    params.validate_ranges()?;
    let mut rows = Vec::with_capacity(kernels.len());
    for (i, (r, src)) in kernels.iter().enumerate() {
        let s = seed.wrapping_add(i as u64);
        let norm = match localized {
            Some(x) => localized_norm(*src, x, *r, params.p, params.q, s)?,
            None => full_norm(*src, params.p, params.q, s)?,
        };
        let rhs = c_dg * params.radius_factor(src.grid().d, *r);
        rows.push(RadiusNorm {
            r: *r,
            norm,
            rhs,
            constant: norm.upper / rhs,
        });
    }
    let spread = spread(rows.iter().map(|a| a.constant));
    Ok(HypercontractiveReport {
        p: params.p,
        q: params.q,
        c_dg,
        spread,
        pass: spread <= STABILITY_FACTOR,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareRootCheck {
    pub p: f64,
    /// ||T_t||_{p->2}^2
    pub lhs: NormBound,
    /// ||T_{2t}||_{p->p'}
    pub rhs: NormBound,
    pub rel_gap: f64,
    pub pass: bool,
}

/// ||T_t||_{p->2}^2 = ||T_t^* T_t||_{p->p'} for a self-adjoint semigroup, with T_t^* T_t = T_{2t}.
/// Exact corners compare to `tol`; interval bounds must overlap.
pub fn check_square_root(
    k: &dyn KernelSource,
    k_double: &dyn KernelSource,
    p: f64,
    tol: f64,
    seed: u64,
) -> Result<SquareRootCheck> {
    if !(1.0..=2.0).contains(&p) {
        return domain(format!("need p in [1,2], got {p}"));
    }
    let pc = conjugate_exponent(p);
    let a = full_norm(k, p, 2.0, seed)?;
    let lhs = NormBound {
        lower: a.lower * a.lower,
        upper: a.upper * a.upper,
        ..a
    };
    let rhs = full_norm(k_double, p, pc, seed.wrapping_add(1))?;
    let rel_gap = (lhs.upper - rhs.upper).abs() / rhs.upper.max(f64::MIN_POSITIVE);
    let pass = if lhs.exact && rhs.exact {
        rel_gap <= tol
    } else {
        lhs.lower <= rhs.upper * (1.0 + tol) && rhs.lower <= lhs.upper * (1.0 + tol)
    };
    Ok(SquareRootCheck {
        p,
        lhs,
        rhs,
        rel_gap,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoRadiusRow {
    pub r0: f64,
    pub k: u32,
    pub norm: NormBound,
    /// right side of the two-radius bound without C_DG
    pub rhs: f64,
    /// same with the volume factor dropped for k <= 1
    pub rhs_improved: f64,
    pub in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoRadiusReport {
    pub r: f64,
    pub c_dg: f64,
    pub rows: Vec<TwoRadiusRow>,
    /// max norm/rhs over fit rows, per r0
    pub constants: Vec<(f64, f64)>,
    pub constants_improved: Vec<(f64, f64)>,
    pub relaxed: bool,
    pub pass: bool,
}

/// Two-radius annulus bound around x: balls and annuli of radius r0 against T_r,
/// for every r0 in `r0s`. `relaxed` replaces the variant constraint by β > d/σ.
#[allow(clippy::too_many_arguments)]
pub fn check_two_radius(
    src: &dyn KernelSource,
    x: usize,
    r: f64,
    r0s: &[f64],
    params: &DGParams,
    c_dg: f64,
    kmax: u32,
    relaxed: bool,
    seed: u64,
) -> Result<TwoRadiusReport> {
    let grid = src.grid();
    let d = grid.d;
    if relaxed {
        params.validate_ranges()?;
        if !(params.beta > params.d_over_sigma(d)) {
            return domain("relaxed two-radius check still needs beta > d/sigma");
        }
    } else {
        params.validate(d)?;
    }
    if !(r > 0.0 && c_dg > 0.0 && c_dg.is_finite()) {
        return domain(format!("need r > 0 and finite C_DG > 0, got r={r}, C_DG={c_dg}"));
    }
    let w = grid.weight();
    let rd = r.powi(d as i32);
    let half = grid.half_diameter();
    let mut rows = Vec::new();
    let mut constants = Vec::new();
    let mut constants_improved = Vec::new();
    for (i, &r0) in r0s.iter().enumerate() {
        let meas = measure_annuli(src, x, r0, params.p, params.q, kmax, seed.wrapping_add(1000 * i as u64))?;
        let ball = meas.first().map_or(0, |m| m.1) as f64 * w;
        let vol = if params.q.is_infinite() {
            1.0
        } else {
            (1.0 + ball / rd).powf(1.0 / params.q)
        };
        let pre = params.radius_factor(d, r);
        let mut c = 0.0f64;
        let mut c_imp = 0.0f64;
        for (k, nodes, outer, norm) in meas {
            let shape = if k >= 2 {
                let dist = (2f64.powi(k as i32 - 1) - 1.0) * r0;
                let area = nodes as f64 * w / rd;
                (dist / r).powf(-params.beta) * area.powf(inv(params.sigma))
            } else {
                1.0
            };
            let rhs = pre * vol * shape;
            let rhs_improved = if k >= 2 { rhs } else { pre };
            let in_fit = outer < half && nodes > 0;
            if in_fit {
                c = c.max(norm.upper / rhs);
                c_imp = c_imp.max(norm.upper / rhs_improved);
            }
            rows.push(TwoRadiusRow {
                r0,
                k,
                norm,
                rhs,
                rhs_improved,
                in_fit,
            });
        }
        constants.push((r0, c));
        constants_improved.push((r0, c_imp));
    }
    let limit = TWO_RADIUS_SLACK * c_dg;
    let pass = constants.iter().chain(&constants_improved).all(|(_, c)| *c <= limit);
    Ok(TwoRadiusReport {
        r,
        c_dg,
        rows,
        constants,
        constants_improved,
        relaxed,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualReport {
    pub p: f64,
    /// (p, p', p') profiles, one per radius
    pub base: Vec<DGReport>,
    /// (2, p') profiles normalized by 2^{kd/2} g(2^k)
    pub two_to_dual: Vec<DGReport>,
    /// (p, 2) profiles normalized by 2^{kd/p'} g(2^k)
    pub p_to_two: Vec<DGReport>,
    pub spread_two_to_dual: f64,
    pub spread_p_to_two: f64,
    pub pass: bool,
}

/// `kernels` pairs each radius with T_r; profiles are taken around x.
pub fn check_dual(
    kernels: &[(f64, &dyn KernelSource)],
    x: usize,
    p: f64,
    beta: f64,
    kmax: u32,
    seed: u64,
) -> Result<DualReport> {
    if kernels.is_empty() {
        return domain("no radii supplied");
    }
    let pc = conjugate_exponent(p);
    let d = kernels[0].1.grid().d;
    let base_params = DGParams::new(p, pc, pc, beta, Variant::Dual);
    base_params.validate(d)?;
    let a_params = DGParams::new(2.0, pc, 2.0, beta, Variant::Dual);
    let b_params = DGParams::new(p, 2.0, pc, beta, Variant::Dual);
    let mut base = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, (r, src)) in kernels.iter().enumerate() {
        let s = seed.wrapping_add(100 * i as u64);
        base.push(profile_unchecked(*src, x, *r, &base_params, kmax, s)?);
        a.push(profile_unchecked(*src, x, *r, &a_params, kmax, s + 1)?);
        b.push(profile_unchecked(*src, x, *r, &b_params, kmax, s + 2)?);
    }
    let sa = spread(a.iter().map(|r| r.fitted_cdg));
    let sb = spread(b.iter().map(|r| r.fitted_cdg));
    let pass = base.iter().chain(&a).chain(&b).all(|r| r.pass)
        && sa <= STABILITY_FACTOR
        && sb <= STABILITY_FACTOR;
    Ok(DualReport {
        p,
        base,
        two_to_dual: a,
        p_to_two: b,
        spread_two_to_dual: sa,
        spread_p_to_two: sb,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpBoundedReport {
    pub p: f64,
    /// (p, p, p') profiles per radius
    pub profiles: Vec<DGReport>,
    /// ||T_r||_{p->p} per radius
    pub norms: Vec<(f64, NormBound)>,
    pub spread: f64,
    pub pass: bool,
}

pub fn check_lp_bounded(
    kernels: &[(f64, &dyn KernelSource)],
    x: usize,
    p: f64,
    beta: f64,
    kmax: u32,
    seed: u64,
) -> Result<LpBoundedReport> {
    if kernels.is_empty() {
        return domain("no radii supplied");
    }
    let pc = conjugate_exponent(p);
    let d = kernels[0].1.grid().d;
    let params = DGParams::new(p, p, pc, beta, Variant::Restricted);
    params.validate(d)?;
    let mut profiles = Vec::new();
    let mut norms = Vec::new();
    for (i, (r, src)) in kernels.iter().enumerate() {
        let s = seed.wrapping_add(100 * i as u64);
        profiles.push(profile_unchecked(*src, x, *r, &params, kmax, s)?);
        norms.push((*r, full_norm(*src, p, p, s + 1)?));
    }
    let spread = spread(norms.iter().map(|(_, n)| n.upper));
    let pass = profiles.iter().all(|r| r.pass) && spread < STABILITY_FACTOR;
    Ok(LpBoundedReport {
        p,
        profiles,
        norms,
        spread,
        pass,
    })
}
