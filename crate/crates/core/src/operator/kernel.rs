use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::GridSpec;
use crate::complex_time::ComplexTime;
use crate::error::{LabError, Result};

/// Anything that can report kernel entries K(x_i, x_j) on a grid.
pub trait KernelSource: Send + Sync {
    fn grid(&self) -> &GridSpec;
    fn entry(&self, i: usize, j: usize) -> Complex64;
    /// True when K(x_i, x_j) depends only on x_j - x_i; scans may then use one column.
    fn translation_invariant(&self) -> bool {
        false
    }
    fn time(&self) -> Option<ComplexTime> {
        None
    }
}

/// Dense kernel matrix, stored as real and imaginary parts.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: GridSpec,
    z: Option<ComplexTime>,
    re: Mat<f64>,
    im: Mat<f64>,
}

impl KernelMatrix {
    pub fn from_parts(grid: GridSpec, z: Option<ComplexTime>, re: Mat<f64>, im: Mat<f64>) -> Self {
        assert_eq!(re.nrows(), grid.len());
        assert_eq!(im.ncols(), grid.len());
        KernelMatrix { grid, z, re, im }
    }

    pub fn from_fn(
        grid: GridSpec,
        z: Option<ComplexTime>,
        f: impl Fn(usize, usize) -> Complex64,
    ) -> Self {
        let nn = grid.len();
        let vals: Vec<Complex64> = (0..nn * nn).map(|k| f(k / nn, k % nn)).collect();
        let re = Mat::from_fn(nn, nn, |i, j| vals[i * nn + j].re);
        let im = Mat::from_fn(nn, nn, |i, j| vals[i * nn + j].im);
        KernelMatrix { grid, z, re, im }
    }

    /// Materialize any kernel source.
    pub fn from_source(src: &dyn KernelSource) -> Self {
        let grid = src.grid().clone();
        let z = src.time();
        KernelMatrix::from_fn(grid, z, |i, j| src.entry(i, j))
    }

    pub fn z(&self) -> Option<ComplexTime> {
        self.z
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn real_part(&self) -> &Mat<f64> {
        &self.re
    }

    pub fn imag_part(&self) -> &Mat<f64> {
        &self.im
    }

    /// Weighted product (A o B)[i][j] = sum_l A[i][l] B[l][j] h^d.
    pub fn compose(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        if self.grid != other.grid {
            return Err(LabError::Grid("compose needs identical grids".into()));
        }
        let w = self.grid.weight();
        let rr = &self.re * &other.re;
        let ii = &self.im * &other.im;
        let ri = &self.re * &other.im;
        let ir = &self.im * &other.re;
        let nn = self.len();
        let re = Mat::from_fn(nn, nn, |i, j| (rr.read(i, j) - ii.read(i, j)) * w);
        let im = Mat::from_fn(nn, nn, |i, j| (ri.read(i, j) + ir.read(i, j)) * w);
        let z = match (self.z, other.z) {
            (Some(a), Some(b)) => a.add(&b).ok(),
            _ => None,
        };
        Ok(KernelMatrix {
            grid: self.grid.clone(),
            z,
            re,
            im,
        })
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> KernelMatrix {
        let nn = self.len();
        KernelMatrix {
            grid: self.grid.clone(),
            z: self.z.map(|z| z.conj()),
            re: self.re.clone(),
            im: Mat::from_fn(nn, nn, |i, j| -self.im.read(i, j)),
        }
    }

    pub fn transpose(&self) -> KernelMatrix {
        KernelMatrix {
            grid: self.grid.clone(),
            z: self.z,
            re: self.re.transpose().to_owned(),
            im: self.im.transpose().to_owned(),
        }
    }

    pub fn max_abs_diff(&self, other: &KernelMatrix) -> f64 {
        let nn = self.len();
        (0..nn)
            .into_par_iter()
            .map(|i| {
                (0..nn)
                    .map(|j| (self.entry(i, j) - other.entry(i, j)).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        let nn = self.len();
        (0..nn)
            .into_par_iter()
            .map(|i| (0..nn).map(|j| self.entry(i, j).norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    /// max |K[i][j] - K[j][i]|.
    pub fn symmetry_defect(&self) -> f64 {
        self.max_abs_diff(&self.transpose())
    }

    /// Weighted matrix-vector product sum_j K[i][j] f_j h^d.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        apply_source(self, f)
    }
}

impl KernelSource for KernelMatrix {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn entry(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re.read(i, j), self.im.read(i, j))
    }

    fn time(&self) -> Option<ComplexTime> {
        self.z
    }
}

/// K[i][j] = c(x_j - x_i) on the torus.
#[derive(Debug, Clone)]
pub struct CirculantKernel {
    grid: GridSpec,
    z: Option<ComplexTime>,
    coeffs: Vec<Complex64>,
    multi: Vec<[usize; 3]>,
}

impl CirculantKernel {
    pub fn new(grid: GridSpec, z: Option<ComplexTime>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len());
        let multi = (0..grid.len()).map(|i| grid.multi_index(i)).collect();
        CirculantKernel {
            grid,
            z,
            coeffs,
            multi,
        }
    }

    /// Value at flat offset index m (per-axis offsets taken mod n).
    pub fn coeff(&self, m: usize) -> Complex64 {
        self.coeffs[m]
    }
}

impl KernelSource for CirculantKernel {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn entry(&self, i: usize, j: usize) -> Complex64 {
        let n = self.grid.n;
        let a = self.multi[i];
        let b = self.multi[j];
        let mut idx = 0;
        for ax in (0..self.grid.d).rev() {
            idx = idx * n + (b[ax] + n - a[ax]) % n;
        }
        self.coeffs[idx]
    }

    fn translation_invariant(&self) -> bool {
        true
    }

    fn time(&self) -> Option<ComplexTime> {
        self.z
    }
}

/// Radial analytic kernel K(x, y) = f(dist(x, y)).
pub struct RadialKernel<F: Fn(f64) -> Complex64 + Send + Sync> {
    grid: GridSpec,
    z: Option<ComplexTime>,
    f: F,
}

impl<F: Fn(f64) -> Complex64 + Send + Sync> RadialKernel<F> {
    pub fn new(grid: GridSpec, z: Option<ComplexTime>, f: F) -> Self {
        RadialKernel { grid, z, f }
    }
}

impl<F: Fn(f64) -> Complex64 + Send + Sync> KernelSource for RadialKernel<F> {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn entry(&self, i: usize, j: usize) -> Complex64 {
        (self.f)(self.grid.dist(i, j))
    }

    fn translation_invariant(&self) -> bool {
        self.grid.periodic
    }

    fn time(&self) -> Option<ComplexTime> {
        self.z
    }
}

/// sum_j K[i][j] f_j h^d for any source.
pub fn apply_source(k: &dyn KernelSource, f: &[Complex64]) -> Vec<Complex64> {
    let g = k.grid();
    let nn = g.len();
    assert_eq!(f.len(), nn);
    let w = g.weight();
    (0..nn)
        .into_par_iter()
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, fj) in f.iter().enumerate() {
                acc += k.entry(i, j) * fj;
            }
            acc * w
        })
        .collect()
}

/// max over columns y of sum_{x : dist(x,y) > r} |K[x][y]|^2 h^d; r = 0 keeps every node.
pub fn weighted_l2_tail(k: &dyn KernelSource, r: f64) -> Result<f64> {
    let g = k.grid();
    if !(r >= 0.0 && r.is_finite()) {
        return Err(LabError::Domain(format!("tail radius {} must be nonnegative", r)));
    }
    if r >= g.half_diameter() {
        return Err(LabError::Domain(format!(
            "tail radius {} must be below L/2 = {}",
            r,
            g.half_diameter()
        )));
    }
    let nn = g.len();
    let w = g.weight();
    let column = |y: usize| -> f64 {
        (0..nn)
            .filter(|&x| r == 0.0 || g.dist(x, y) > r)
            .map(|x| k.entry(x, y).norm_sqr())
            .sum::<f64>()
            * w
    };
    if k.translation_invariant() {
        return Ok(column(0));
    }
    Ok((0..nn).into_par_iter().map(column).reduce(|| 0.0, f64::max))
}
