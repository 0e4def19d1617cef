use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::grid::GridSpec;
use super::kernel::{CirculantKernel, KernelMatrix, KernelSource};
use super::potential::PotentialSpec;
use super::random_unit_vector;
use crate::complex_time::ComplexTime;
use crate::error::{LabError, Result};

pub const SYMMETRY_TOL: f64 = 1e-10;
pub const ORTHONORMAL_TOL: f64 = 1e-8;
pub const NONNEG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Fail with an assembly error when lambda_min < -1e-8 |lambda_max|.
    pub assert_nonneg: bool,
    /// Use the dense eigensolver even for V = 0.
    pub force_dense: bool,
}

/// Eigenbasis storage. For V = 0 the real tensor Fourier basis is known in
/// closed form and nothing is factorized.
#[derive(Debug, Clone)]
enum Basis {
    /// Sorted mode indices; mode j has per-axis real Fourier functions j_a.
    Fourier { modes: Vec<usize> },
    Dense(Mat<f64>),
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: GridSpec,
    alpha: f64,
    potential: PotentialSpec,
    eigenvalues: Vec<f64>,
    basis: Basis,
    /// Symbol |xi_k|^alpha at natural frequency index k (axis values 0..n).
    symbol: Vec<f64>,
    v_diag: Vec<f64>,
    multi: Vec<[usize; 3]>,
}

/// Per-axis frequency of the real 1-d basis function j:
/// 0 constant, 2k-1 cosine k, 2k sine k, n-1 Nyquist.
fn mode_frequency(n: usize, j: usize) -> usize {
    if j == n - 1 {
        n / 2
    } else {
        (j + 1) / 2
    }
}

fn basis_1d(n: usize, j: usize, i: usize) -> f64 {
    let nf = n as f64;
    if j == 0 {
        return 1.0 / nf.sqrt();
    }
    if j == n - 1 {
        return if i % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt();
    }
    let k = (j + 1) / 2;
    let arg = 2.0 * PI * ((k * i) % n) as f64 / nf;
    if j % 2 == 1 {
        (2.0 / nf).sqrt() * arg.cos()
    } else {
        (2.0 / nf).sqrt() * arg.sin()
    }
}

fn symbol_table(grid: &GridSpec, alpha: f64, multi: &[[usize; 3]]) -> Vec<f64> {
    let n = grid.n;
    let l = grid.box_length;
    multi
        .iter()
        .map(|m| {
            let mut xi2 = 0.0;
            for &k in m.iter().take(grid.d) {
                let s = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                let xi = 2.0 * PI * s / l;
                xi2 += xi * xi;
            }
            if xi2 == 0.0 {
                0.0
            } else {
                xi2.powf(alpha / 2.0)
            }
        })
        .collect()
}

impl DiscreteOperator {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn potential_diagonal(&self) -> &[f64] {
        &self.v_diag
    }

    pub fn is_fourier(&self) -> bool {
        matches!(self.basis, Basis::Fourier { .. })
    }

    /// Quadrature weights h^d, one per node.
    pub fn h_weights(&self) -> Vec<f64> {
        vec![self.grid.weight(); self.grid.len()]
    }

    /// Orthonormal eigenvector matrix (columns), in eigenvalue order.
    pub fn eigenvectors(&self) -> Mat<f64> {
        match &self.basis {
            Basis::Dense(phi) => phi.clone(),
            Basis::Fourier { modes } => {
                let n = self.grid.n;
                let d = self.grid.d;
                let mm = &self.multi;
                Mat::from_fn(self.grid.len(), modes.len(), |i, c| {
                    let jm = &mm[modes[c]];
                    let im = &mm[i];
                    (0..d).map(|a| basis_1d(n, jm[a], im[a])).product()
                })
            }
        }
    }

    /// Coefficients c(m) of the circulant matrix Phi g(Lambda) Phi^T for V = 0,
    /// indexed by the flat offset m.
    fn circulant_coeffs(&self, g: &(dyn Fn(f64) -> Complex64 + Sync)) -> Vec<Complex64> {
        let n = self.grid.n;
        let d = self.grid.d;
        let nn = self.grid.len();
        let cos: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / n as f64).cos()).collect();
        let gk: Vec<Complex64> = self.symbol.iter().map(|l| g(*l)).collect();
        let multi = &self.multi;
        (0..nn)
            .into_par_iter()
            .map(|m| {
                let mm = multi[m];
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, kk) in multi.iter().enumerate() {
                    let mut c = 1.0;
                    for a in 0..d {
                        c *= cos[(kk[a] * mm[a]) % n];
                    }
                    acc += gk[k] * c;
                }
                acc / nn as f64
            })
            .collect()
    }

    fn offset_index(&self, i: usize, j: usize) -> usize {
        let n = self.grid.n;
        let a = self.multi[i];
        let b = self.multi[j];
        let mut idx = 0;
        for ax in (0..self.grid.d).rev() {
            idx = idx * n + (b[ax] + n - a[ax]) % n;
        }
        idx
    }

    /// Assembled symmetric matrix T + diag(V).
    pub fn assembled(&self) -> Mat<f64> {
        let c = self.circulant_coeffs(&|l| Complex64::new(l, 0.0));
        let nn = self.grid.len();
        Mat::from_fn(nn, nn, |i, j| {
            let t = c[self.offset_index(i, j)].re;
            if i == j {
                t + self.v_diag[i]
            } else {
                t
            }
        })
    }

    /// Phi g(Lambda) Phi^T f (unweighted spectral multiplier).
    pub fn apply_multiplier(
        &self,
        f: &[Complex64],
        g: &(dyn Fn(f64) -> Complex64 + Sync),
    ) -> Vec<Complex64> {
        let nn = self.grid.len();
        assert_eq!(f.len(), nn);
        match &self.basis {
            Basis::Fourier { .. } => {
                let c = self.circulant_coeffs(g);
                (0..nn)
                    .into_par_iter()
                    .map(|i| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (j, fj) in f.iter().enumerate() {
                            acc += c[self.offset_index(i, j)] * fj;
                        }
                        acc
                    })
                    .collect()
            }
            Basis::Dense(phi) => {
                let fm = Mat::from_fn(nn, 2, |i, c| if c == 0 { f[i].re } else { f[i].im });
                let coef = phi.transpose() * &fm;
                let gl: Vec<Complex64> = self.eigenvalues.iter().map(|l| g(*l)).collect();
                let scaled = Mat::from_fn(nn, 2, |j, c| {
                    let v = Complex64::new(coef.read(j, 0), coef.read(j, 1)) * gl[j];
                    if c == 0 {
                        v.re
                    } else {
                        v.im
                    }
                });
                let out = phi * &scaled;
                (0..nn).map(|i| Complex64::new(out.read(i, 0), out.read(i, 1))).collect()
            }
        }
    }

    /// (e^{-zH} f)(x_i) = sum_j K[i][j] f(x_j) h^d.
    pub fn apply_semigroup(&self, z: &ComplexTime, f: &[Complex64]) -> Vec<Complex64> {
        let zc = z.to_complex();
        self.apply_multiplier(f, &move |l| (-zc * l).exp())
    }

    /// e^{-isH} f for real s.
    pub fn apply_unitary(&self, s: f64, f: &[Complex64]) -> Vec<Complex64> {
        self.apply_multiplier(f, &move |l| Complex64::new(0.0, -s * l).exp())
    }

    /// Dense kernel matrix K = Phi diag(e^{-z lambda}) Phi^T / h^d.
    pub fn semigroup_kernel(&self, z: &ComplexTime) -> KernelMatrix {
        let w = self.grid.weight();
        let nn = self.grid.len();
        let zc = z.to_complex();
        match &self.basis {
            Basis::Fourier { .. } => {
                let c = self.circulant_coeffs(&move |l| (-zc * l).exp());
                let re = Mat::from_fn(nn, nn, |i, j| c[self.offset_index(i, j)].re / w);
                let im = Mat::from_fn(nn, nn, |i, j| c[self.offset_index(i, j)].im / w);
                KernelMatrix::from_parts(self.grid.clone(), Some(*z), re, im)
            }
            Basis::Dense(phi) => {
                let e: Vec<Complex64> = self.eigenvalues.iter().map(|l| (-zc * l).exp()).collect();
                let ar = Mat::from_fn(nn, nn, |i, j| phi.read(i, j) * e[j].re);
                let ai = Mat::from_fn(nn, nn, |i, j| phi.read(i, j) * e[j].im);
                let mut re = &ar * phi.transpose();
                let mut im = &ai * phi.transpose();
                scale_in_place(&mut re, 1.0 / w);
                scale_in_place(&mut im, 1.0 / w);
                KernelMatrix::from_parts(self.grid.clone(), Some(*z), re, im)
            }
        }
    }

    /// Translation-invariant kernel for V = 0 without materializing N^2 entries.
    pub fn circulant_kernel(&self, z: &ComplexTime) -> Result<CirculantKernel> {
        if !self.is_fourier() {
            return Err(LabError::Domain(
                "circulant kernel needs V = 0 and the Fourier basis".into(),
            ));
        }
        let zc = z.to_complex();
        let w = self.grid.weight();
        let c = self
            .circulant_coeffs(&move |l| (-zc * l).exp())
            .into_iter()
            .map(|v| v / w)
            .collect();
        Ok(CirculantKernel::new(self.grid.clone(), Some(*z), c))
    }

    /// Circulant kernel when available, dense matrix otherwise.
    pub fn kernel_source(&self, z: &ComplexTime) -> Box<dyn KernelSource> {
        match self.circulant_kernel(z) {
            Ok(c) => Box::new(c),
            Err(_) => Box::new(self.semigroup_kernel(z)),
        }
    }

    /// Deviation | ||e^{-isH} f||_2 - 1 | for a seeded random unit vector f.
    pub fn unitary_check(&self, s: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = self.grid.weight();
        let f = random_unit_vector(&mut rng, self.grid.len(), w);
        let g = self.apply_unitary(s, &f);
        let norm = (g.iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt();
        (norm - 1.0).abs()
    }
}

fn scale_in_place(m: &mut Mat<f64>, s: f64) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m.write(i, j, m.read(i, j) * s);
        }
    }
}

pub fn build_operator(
    grid: GridSpec,
    alpha: f64,
    potential: PotentialSpec,
) -> Result<DiscreteOperator> {
    build_operator_with(grid, alpha, potential, BuildOptions::default())
}

pub fn build_operator_with(
    grid: GridSpec,
    alpha: f64,
    potential: PotentialSpec,
    opts: BuildOptions,
) -> Result<DiscreteOperator> {
    grid.validate()?;
    if !grid.periodic {
        return Err(LabError::Grid("operators live on the periodic grid".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(LabError::Domain(format!("alpha = {} must be positive", alpha)));
    }
    let v_diag = potential.sample(&grid, alpha)?;
    let multi: Vec<[usize; 3]> = (0..grid.len()).map(|i| grid.multi_index(i)).collect();
    let symbol = symbol_table(&grid, alpha, &multi);

    let mut op = DiscreteOperator {
        grid,
        alpha,
        potential,
        eigenvalues: Vec::new(),
        basis: Basis::Fourier { modes: Vec::new() },
        symbol,
        v_diag,
        multi,
    };

    if op.potential.is_zero() && !opts.force_dense {
        let n = op.grid.n;
        let d = op.grid.d;
        let mut modes: Vec<(f64, usize)> = (0..op.grid.len())
            .map(|j| {
                let jm = op.multi[j];
                let mut k = [0usize; 3];
                for a in 0..d {
                    k[a] = mode_frequency(n, jm[a]);
                }
                (op.symbol[op.grid.flat_index(&k)], j)
            })
            .collect();
        modes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        op.eigenvalues = modes.iter().map(|m| m.0).collect();
        op.basis = Basis::Fourier {
            modes: modes.iter().map(|m| m.1).collect(),
        };
    } else {
        let h = op.assembled();
        check_symmetric(&h)?;
        let evd = h.selfadjoint_eigendecomposition(Side::Lower);
        let s = evd.s().column_vector();
        let u = evd.u();
        let nn = op.grid.len();
        let mut order: Vec<usize> = (0..nn).collect();
        order.sort_by(|&a, &b| s.read(a).total_cmp(&s.read(b)).then(a.cmp(&b)));
        op.eigenvalues = order.iter().map(|&k| s.read(k)).collect();
        op.basis = Basis::Dense(Mat::from_fn(nn, nn, |i, c| u.read(i, order[c])));
        check_orthonormal_probe(&op)?;
    }

    if opts.assert_nonneg {
        let scale = op.lambda_max().abs().max(1.0);
        if op.lambda_min() < -NONNEG_TOL * scale {
            return Err(LabError::Assembly(format!(
                "form not nonnegative: lambda_min = {:.6e}",
                op.lambda_min()
            )));
        }
    }
    Ok(op)
}

fn check_symmetric(h: &Mat<f64>) -> Result<()> {
    let nn = h.nrows();
    let mut diff = 0.0;
    let mut total = 0.0;
    for j in 0..nn {
        for i in 0..nn {
            let a = h.read(i, j);
            diff += (a - h.read(j, i)).powi(2);
            total += a * a;
        }
    }
    if diff.sqrt() > SYMMETRY_TOL * total.sqrt() {
        return Err(LabError::Assembly(format!(
            "assembled matrix not symmetric: relative defect {:.3e}",
            diff.sqrt() / total.sqrt()
        )));
    }
    Ok(())
}

/// Orthonormality probed on random vectors: ||Phi^T Phi x - x|| <= tol ||x||.
fn check_orthonormal_probe(op: &DiscreteOperator) -> Result<()> {
    if let Basis::Dense(phi) = &op.basis {
        let nn = phi.nrows();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let x = random_unit_vector(&mut rng, nn, 1.0);
        let xm = Mat::from_fn(nn, 1, |i, _| x[i].re);
        let y = phi.transpose() * (phi * &xm);
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for i in 0..nn {
            err += (y.read(i, 0) - xm.read(i, 0)).powi(2);
            norm += xm.read(i, 0).powi(2);
        }
        if err.sqrt() > ORTHONORMAL_TOL * norm.sqrt() {
            return Err(LabError::Assembly(format!(
                "eigenvectors not orthonormal: probe defect {:.3e}",
                err.sqrt()
            )));
        }
    }
    Ok(())
}
