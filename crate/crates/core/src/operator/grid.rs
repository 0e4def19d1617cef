use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const DEFAULT_CAP: usize = 4096;

fn default_cap() -> usize {
    DEFAULT_CAP
}

fn default_periodic() -> bool {
    true
}

/// Uniform grid with n points per axis on [0, L)^d.
///
/// Node `i` has axis coordinates `(i / n^a) % n` (axis 0 varies fastest).
/// With `periodic` the metric is the torus metric; otherwise plain Euclidean
/// distance between node coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    pub box_length: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default = "default_periodic")]
    pub periodic: bool,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, box_length: f64) -> Result<Self> {
        let g = GridSpec {
            d,
            n,
            box_length,
            cap: DEFAULT_CAP,
            periodic: true,
        };
        g.validate()?;
        Ok(g)
    }

    /// Non-periodic sample grid, used for analytic kernels on a window of R^d.
    pub fn open(d: usize, n: usize, box_length: f64, cap: usize) -> Result<Self> {
        let g = GridSpec {
            d,
            n,
            box_length,
            cap,
            periodic: false,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(LabError::Grid(format!("d = {} not in 1..=3", self.d)));
        }
        if self.n < 2 || self.n % 2 != 0 {
            return Err(LabError::Grid(format!("n = {} must be even and >= 2", self.n)));
        }
        if !(self.box_length.is_finite() && self.box_length > 0.0) {
            return Err(LabError::Grid(format!("box_length = {} must be positive", self.box_length)));
        }
        let total = self.n.checked_pow(self.d as u32).unwrap_or(usize::MAX);
        if total > self.cap {
            return Err(LabError::Grid(format!(
                "n^d = {} exceeds cap {}",
                total, self.cap
            )));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight h^d.
    pub fn weight(&self) -> f64 {
        self.h().powi(self.d as i32)
    }

    pub fn multi_index(&self, i: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rest = i;
        for slot in out.iter_mut().take(self.d) {
            *slot = rest % self.n;
            rest /= self.n;
        }
        out
    }

    pub fn flat_index(&self, m: &[usize]) -> usize {
        let mut i = 0;
        for a in (0..self.d).rev() {
            i = i * self.n + m[a] % self.n;
        }
        i
    }

    /// Node whose coordinates are (n/2) h on every axis.
    pub fn center(&self) -> usize {
        self.flat_index(&[self.n / 2; 3])
    }

    /// Per-axis offset from i to j in units of h (wrapped to [-n/2, n/2] on the torus).
    pub fn offset(&self, i: usize, j: usize) -> [i64; 3] {
        let a = self.multi_index(i);
        let b = self.multi_index(j);
        let n = self.n as i64;
        let mut out = [0i64; 3];
        for ax in 0..self.d {
            let mut m = b[ax] as i64 - a[ax] as i64;
            if self.periodic {
                m = m.rem_euclid(n);
                if m > n / 2 {
                    m -= n;
                }
            }
            out[ax] = m;
        }
        out
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        let o = self.offset(i, j);
        let s: i64 = o.iter().map(|m| m * m).sum();
        (s as f64).sqrt() * self.h()
    }

    /// Largest radius for which balls do not see the wrap (torus) or the
    /// window edge from the center (open grid).
    pub fn half_diameter(&self) -> f64 {
        self.box_length / 2.0
    }

    /// Snap r to the nearest node midpoint (m + 1/2) h with m >= 0.
    pub fn snap_midpoint(&self, r: f64) -> f64 {
        let h = self.h();
        let m = (r / h - 0.5).round().max(0.0);
        (m + 0.5) * h
    }
}
