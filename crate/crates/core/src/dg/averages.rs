//! Ball averages N_{p,q,r} f(x) = r^{-d/q} ||1_{B_x(r)} f||_p on the torus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::operator::GridSpec;

/// Weighted discrete L^p norm (sum |f|^p h^d)^{1/p}.
pub fn lp_norm(grid: &GridSpec, f: &[f64], p: f64) -> f64 {
    let w = grid.weight();
    if p.is_infinite() {
        return f.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    (f.iter().map(|v| v.abs().powf(p)).sum::<f64>() * w).powf(1.0 / p)
}

/// Lattice offsets of the closed ball of radius r around a node.
fn ball_offsets(grid: &GridSpec, r: f64) -> Vec<[i64; 3]> {
    let h = grid.h();
    let m = (r / h).floor() as i64;
    let span = |ax: usize| if ax < grid.d { -m..=m } else { 0..=0 };
    let mut out = Vec::new();
    for a in span(0) {
        for b in span(1) {
            for c in span(2) {
                let s = (a * a + b * b + c * c) as f64;
                if s.sqrt() * h <= r {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Number of nodes in a torus ball of radius r (r below the half-diameter).
pub fn ball_count(grid: &GridSpec, r: f64) -> usize {
    ball_offsets(grid, r).len()
}

pub fn ball_average(grid: &GridSpec, f: &[f64], p: f64, q: f64, r: f64) -> Result<Vec<f64>> {
    if f.len() != grid.len() {
        return domain(format!("function has {} values, grid has {}", f.len(), grid.len()));
    }
    if !(r >= grid.h()) || r >= grid.half_diameter() {
        return domain(format!("radius {r} must lie in [h, L/2)"));
    }
    if !(p >= 1.0 && p.is_finite() && q >= 1.0) {
        return domain(format!("need finite p >= 1 and q >= 1, got p={p}, q={q}"));
    }
    let offs = ball_offsets(grid, r);
    let n = grid.n as i64;
    let w = grid.weight();
    let pre = if q.is_infinite() {
        1.0
    } else {
        r.powf(-(grid.d as f64) / q)
    };
    let fp: Vec<f64> = f.iter().map(|v| v.abs().powf(p)).collect();
    Ok((0..grid.len())
        .map(|x| {
            let m = grid.multi_index(x);
            let s: f64 = offs
                .iter()
                .map(|o| {
                    let mut idx = [0usize; 3];
                    for ax in 0..grid.d {
                        idx[ax] = (m[ax] as i64 + o[ax]).rem_euclid(n) as usize;
                    }
                    fp[grid.flat_index(&idx)]
                })
                .sum();
            pre * (s * w).powf(1.0 / p)
        })
        .collect())
}

fn random_function(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    // mix of smooth-ish noise and sparse spikes so the ratio is probed off constants
    (0..len)
        .map(|_| {
            let v: f64 = rng.gen_range(-1.0..1.0);
            if rng.gen_bool(0.05) {
                v * 20.0
            } else {
                v
            }
        })
        .collect()
}

fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI / 3.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageCheck {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// ||N_{p,r} f||_p / ||f||_p over random f, against the r-independent bracket
/// [(ω_d/2)^{1/p}, (2ω_d)^{1/p}].
pub fn check_average_equivalence(
    grid: &GridSpec,
    p: f64,
    radii: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<AverageCheck>> {
    let omega = unit_ball_volume(grid.d);
    let lower = (omega / 2.0).powf(1.0 / p);
    let upper = (2.0 * omega).powf(1.0 / p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs: Vec<Vec<f64>> = (0..trials).map(|_| random_function(&mut rng, grid.len())).collect();
    radii
        .iter()
        .map(|&r| {
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for f in &fs {
                let nf = ball_average(grid, f, p, p, r)?;
                let ratio = lp_norm(grid, &nf, p) / lp_norm(grid, f, p);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            Ok(AverageCheck {
                p,
                q: p,
                r,
                min_ratio: lo,
                max_ratio: hi,
                lower,
                upper,
                pass: lo >= lower && hi <= upper,
            })
        })
        .collect()
}

/// ||N_{p,q,r} f||_q / ||f||_p over random f; the bound (|B(r)| / r^d)^{1/q}
/// is r-stable on the lattice.
pub fn check_average_bounded(
    grid: &GridSpec,
    p: f64,
    q: f64,
    radii: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<AverageCheck>> {
    if !(q >= p) {
        return domain(format!("need q >= p, got p={p}, q={q}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs: Vec<Vec<f64>> = (0..trials).map(|_| random_function(&mut rng, grid.len())).collect();
    let d = grid.d as i32;
    radii
        .iter()
        .map(|&r| {
            let vol = ball_count(grid, r) as f64 * grid.weight() / r.powi(d);
            let bound = if q.is_infinite() { 1.0 } else { vol.powf(1.0 / q) };
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for f in &fs {
                let nf = ball_average(grid, f, p, q, r)?;
                let ratio = lp_norm(grid, &nf, q) / lp_norm(grid, f, p);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            Ok(AverageCheck {
                p,
                q,
                r,
                min_ratio: lo,
                max_ratio: hi,
                lower: 0.0,
                upper: bound,
                pass: hi <= bound * (1.0 + 1e-12),
            })
        })
        .collect()
}
