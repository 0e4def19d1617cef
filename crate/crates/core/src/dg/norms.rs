//! p -> q norms of (masked) kernel matrices in weighted discrete L^p.

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::operator::KernelSource;

/// Upper/lower bracket flagged when upper exceeds lower by this factor.
pub const UNCERTAIN_GAP: f64 = 3.0;

/// Dense block of kernel entries (unweighted), row-major.
#[derive(Debug, Clone)]
pub struct SubMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl SubMatrix {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        SubMatrix { rows, cols, data }
    }

    pub fn from_source(src: &dyn KernelSource, rows: &[usize], cols: &[usize]) -> Self {
        SubMatrix::from_fn(rows.len(), cols.len(), |i, j| src.entry(rows[i], cols[j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> SubMatrix {
        SubMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn adjoint(&self) -> SubMatrix {
        SubMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * y[i];
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }
}

/// Certified interval for a weighted p -> q norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBound {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub uncertain: bool,
}

impl NormBound {
    fn exact(v: f64) -> Self {
        NormBound {
            lower: v,
            upper: v,
            exact: true,
            uncertain: false,
        }
    }

    fn scaled(self, s: f64) -> Self {
        NormBound {
            lower: self.lower * s,
            upper: self.upper * s,
            ..self
        }
    }
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn lp(v: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        v.fold(0.0, f64::max)
    } else if p == 1.0 {
        v.sum()
    } else if p == 2.0 {
        v.map(|a| a * a).sum::<f64>().sqrt()
    } else {
        let vals: Vec<f64> = v.collect();
        let m = vals.iter().cloned().fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * vals.iter().map(|a| (a / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn vec_norm(x: &[Complex64], p: f64) -> f64 {
    lp(x.iter().map(|c| c.norm()), p)
}

/// Unweighted 1 -> q norm: largest column l^q norm.
pub fn max_column_norm(m: &SubMatrix, q: f64) -> f64 {
    (0..m.cols)
        .map(|j| lp((0..m.rows).map(|i| m.get(i, j).norm()), q))
        .fold(0.0, f64::max)
}

/// Unweighted p -> inf norm: largest row l^{p'} norm.
pub fn max_row_norm(m: &SubMatrix, p: f64) -> f64 {
    let pc = conjugate_exponent(p);
    (0..m.rows)
        .map(|i| lp((0..m.cols).map(|j| m.get(i, j).norm()), pc))
        .fold(0.0, f64::max)
}

/// Unweighted spectral norm via the Gram matrix on the smaller side,
/// embedded as a real symmetric matrix [[Re G, -Im G], [Im G, Re G]].
pub fn spectral_norm(m: &SubMatrix) -> f64 {
    if m.rows == 0 || m.cols == 0 {
        return 0.0;
    }
    let (a, small) = if m.rows <= m.cols {
        (m.clone(), m.rows)
    } else {
        (m.adjoint(), m.cols)
    };
    let ar = Mat::from_fn(a.rows, a.cols, |i, j| a.get(i, j).re);
    let ai = Mat::from_fn(a.rows, a.cols, |i, j| a.get(i, j).im);
    // G = A A^*
    let gr = &ar * ar.transpose() + &ai * ai.transpose();
    let gi = &ai * ar.transpose() - &ar * ai.transpose();
    if ai.norm_max() == 0.0 {
        let ev = gr.selfadjoint_eigenvalues(Side::Lower);
        return ev.into_iter().fold(0.0, f64::max).max(0.0).sqrt();
    }
    let big = Mat::from_fn(2 * small, 2 * small, |i, j| {
        let (bi, ii) = (i / small, i % small);
        let (bj, jj) = (j / small, j % small);
        match (bi, bj) {
            (0, 0) | (1, 1) => gr.read(ii, jj),
            (0, 1) => -gi.read(ii, jj),
            _ => gi.read(ii, jj),
        }
    });
    let ev = big.selfadjoint_eigenvalues(Side::Lower);
    ev.into_iter().fold(0.0, f64::max).max(0.0).sqrt()
}

/// Points (1/p, 1/q) where the norm is computed exactly, with their values.
fn exact_points(m: &SubMatrix, u: f64, v: f64) -> Vec<((f64, f64), f64)> {
    let mut pts = Vec::new();
    let mut grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    grid.push(u);
    grid.push(v);
    grid.push(1.0 - u);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    for &t in &grid {
        // (1, t): 1 -> 1/t
        let q = if t == 0.0 { f64::INFINITY } else { 1.0 / t };
        pts.push(((1.0, t), max_column_norm(m, q)));
        // (t, 0): 1/t -> inf
        let p = if t == 0.0 { f64::INFINITY } else { 1.0 / t };
        pts.push(((t, 0.0), max_row_norm(m, p)));
    }
    pts.push(((0.5, 0.5), spectral_norm(m)));
    pts
}

fn barycentric(p: (f64, f64), a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<[f64; 3]> {
    let det = (b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1);
    if det.abs() < 1e-14 {
        return None;
    }
    let l1 = ((p.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (p.1 - a.1)) / det;
    let l2 = ((b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1)) / det;
    let l0 = 1.0 - l1 - l2;
    let tol = -1e-12;
    if l0 >= tol && l1 >= tol && l2 >= tol {
        Some([l0.max(0.0), l1.max(0.0), l2.max(0.0)])
    } else {
        None
    }
}

fn segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> Option<f64> {
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    let len2 = dx * dx + dy * dy;
    if len2 < 1e-28 {
        return None;
    }
    let t = ((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2;
    let cx = a.0 + t * dx - p.0;
    let cy = a.1 + t * dy - p.1;
    if (-1e-12..=1.0 + 1e-12).contains(&t) && cx * cx + cy * cy < 1e-24 {
        Some(t.clamp(0.0, 1.0))
    } else {
        None
    }
}

/// Riesz-Thorin: log of the norm is convex in (1/p, 1/q); minimize the
/// interpolated bound over segments and triangles of exact points.
fn interpolated_upper(m: &SubMatrix, p: f64, q: f64) -> f64 {
    let target = (inv(p), inv(q));
    let pts = exact_points(m, target.0, target.1);
    let mut best = f64::INFINITY;
    let value = |ws: &[(usize, f64)]| -> f64 {
        let mut log = 0.0;
        for &(i, l) in ws {
            if l == 0.0 {
                continue;
            }
            if pts[i].1 == 0.0 {
                return 0.0;
            }
            log += l * pts[i].1.ln();
        }
        log.exp()
    };
    for i in 0..pts.len() {
        if (pts[i].0 .0 - target.0).abs() < 1e-15 && (pts[i].0 .1 - target.1).abs() < 1e-15 {
            best = best.min(pts[i].1);
        }
        for j in i + 1..pts.len() {
            if let Some(t) = segment(target, pts[i].0, pts[j].0) {
                best = best.min(value(&[(i, 1.0 - t), (j, t)]));
            }
            for k in j + 1..pts.len() {
                if let Some(l) = barycentric(target, pts[i].0, pts[j].0, pts[k].0) {
                    best = best.min(value(&[(i, l[0]), (j, l[1]), (k, l[2])]));
                }
            }
        }
    }
    best
}

/// psi_r(y) = |y|^{r-1} sgn(y), the l^r duality map up to normalization.
fn duality_map(y: &[Complex64], r: f64) -> Vec<Complex64> {
    if r.is_infinite() {
        let m = y.iter().map(|c| c.norm()).fold(0.0, f64::max);
        return y
            .iter()
            .map(|c| {
                if c.norm() >= m * (1.0 - 1e-12) && m > 0.0 {
                    c / c.norm()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
    }
    y.iter()
        .map(|c| {
            let a = c.norm();
            if a == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                c / a * a.powf(r - 1.0)
            }
        })
        .collect()
}

/// v / max|v| (the power steps are scale invariant; this keeps |v|^{r-1} in range).
fn rescaled(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let m = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if m > 0.0 {
        v.iter_mut().for_each(|c| *c /= m);
    }
    v
}

/// Lower bound by Boyd's nonlinear power iteration from several deterministic starts.
fn power_lower(m: &SubMatrix, p: f64, q: f64, seed: u64) -> f64 {
    let pc = conjugate_exponent(p);
    let mut starts: Vec<Vec<Complex64>> = Vec::new();
    starts.push(vec![Complex64::new(1.0, 0.0); m.cols]);
    let best_col = (0..m.cols)
        .max_by(|&a, &b| {
            let na = lp((0..m.rows).map(|i| m.get(i, a).norm()), q);
            let nb = lp((0..m.rows).map(|i| m.get(i, b).norm()), q);
            na.total_cmp(&nb)
        })
        .unwrap_or(0);
    let mut e = vec![Complex64::new(0.0, 0.0); m.cols];
    e[best_col] = Complex64::new(1.0, 0.0);
    starts.push(e);
    // conjugated row with the largest l^{p'} norm
    let best_row = (0..m.rows)
        .max_by(|&a, &b| {
            let na = lp((0..m.cols).map(|j| m.get(a, j).norm()), pc);
            let nb = lp((0..m.cols).map(|j| m.get(b, j).norm()), pc);
            na.total_cmp(&nb)
        })
        .unwrap_or(0);
    let row: Vec<Complex64> = (0..m.cols).map(|j| m.get(best_row, j).conj()).collect();
    starts.push(duality_map(&row, pc.min(1e6)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    starts.push(
        (0..m.cols)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect(),
    );
    let mut best = 0.0f64;
    for mut x in starts {
        let mut local = 0.0f64;
        for _ in 0..200 {
            let nx = vec_norm(&x, p);
            if !(nx > 0.0 && nx.is_finite()) {
                break;
            }
            x.iter_mut().for_each(|c| *c /= nx);
            let y = m.apply(&x);
            let ratio = vec_norm(&y, q);
            let y = rescaled(y);
            if !ratio.is_finite() {
                break;
            }
            let improved = ratio > local * (1.0 + 1e-9);
            local = local.max(ratio);
            best = best.max(ratio);
            let g = rescaled(m.apply_adjoint(&duality_map(&y, q)));
            let next = if p == 1.0 {
                // extreme point of the l^1 ball
                let j = (0..g.len())
                    .max_by(|&a, &b| g[a].norm().total_cmp(&g[b].norm()))
                    .unwrap();
                let mut v = vec![Complex64::new(0.0, 0.0); g.len()];
                v[j] = if g[j].norm() > 0.0 { g[j] / g[j].norm() } else { Complex64::new(1.0, 0.0) };
                v
            } else {
                duality_map(&g, pc)
            };
            if !improved && ratio > 0.0 {
                break;
            }
            x = next;
        }
    }
    best
}

/// Weighted p -> q norm of f -> (sum_j A_ij f_j w)_i with ||f||_p = (sum |f_j|^p w)^{1/p}.
pub fn opnorm(m: &SubMatrix, w: f64, p: f64, q: f64, seed: u64) -> Result<NormBound> {
    if !(p >= 1.0 && q >= 1.0) {
        return domain(format!("norm exponents must be >= 1, got p={p}, q={q}"));
    }
    if !(p <= q) {
        return domain(format!("need p <= q, got p={p}, q={q}"));
    }
    if !(w > 0.0) {
        return domain("weight must be positive");
    }
    let scale = w.powf(1.0 + inv(q) - inv(p));
    if m.rows == 0 || m.cols == 0 || m.is_zero() {
        return Ok(NormBound::exact(0.0));
    }
    let raw = if p == 1.0 {
        NormBound::exact(max_column_norm(m, q))
    } else if q.is_infinite() {
        NormBound::exact(max_row_norm(m, p))
    } else if p == 2.0 && q == 2.0 {
        NormBound::exact(spectral_norm(m))
    } else {
        let upper = interpolated_upper(m, p, q);
        let lower = power_lower(m, p, q, seed);
        let lower = lower.min(upper);
        NormBound {
            lower,
            upper,
            exact: false,
            uncertain: upper > UNCERTAIN_GAP * lower,
        }
    };
    Ok(raw.scaled(scale))
}
