//! Radial profile Λ_ν(x) = J_ν(x)/x^ν for ν = d/2 - 1, d ∈ {1, 2, 3}.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{domain, Result};

pub const SERIES_MAX: f64 = 8.0;
pub const MILLER_MAX: f64 = 25.0;

fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        k += 1.0;
    }
    sum
}

fn j0_miller(x: f64) -> f64 {
    let start = 2 * ((x + 20.0 + (40.0 * x).sqrt()) as usize / 2) + 2;
    let mut jp1 = 0.0;
    let mut j = 1e-30;
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
        }
        let order = k - 1;
        if order == 0 {
            j0 = j;
        } else if order % 2 == 0 {
            norm += 2.0 * j;
        }
    }
    j0 / (norm + j0)
}

fn j0_hankel(x: f64) -> f64 {
    // a_k = prod_{m=1..k} (-(2m-1)^2) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a: f64 = 1.0;
    let mut xp = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        let term = a / xp;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-18 {
            break;
        }
        let m = (2 * k + 1) as f64;
        a *= -(m * m) / ((k + 1) as f64 * 8.0);
        xp *= x;
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_MAX {
        j0_series(x)
    } else if x < MILLER_MAX {
        j0_miller(x)
    } else {
        j0_hankel(x)
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() / x
    }
}

/// Λ_ν(x) with ν = d/2 - 1; Λ_ν(0) = 1/(2^ν Γ(ν+1)).
#[derive(Debug, Clone, Copy)]
pub struct RadialProfile {
    d: usize,
}

impl RadialProfile {
    pub fn new(d: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return domain(format!("dimension {d} unsupported (1..=3)"));
        }
        Ok(Self { d })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let c = (2.0 / PI).sqrt();
        match self.d {
            1 => c * x.cos(),
            2 => bessel_j0(x),
            _ => c * sinc(x),
        }
    }

    pub fn at_zero(&self) -> f64 {
        match self.d {
            2 => 1.0,
            _ => (2.0 / PI).sqrt(),
        }
    }

    /// sup |Λ| over [0, ∞), attained at 0.
    pub fn sup(&self) -> f64 {
        self.at_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes_agree_at_switchovers() {
        for x in [7.5, 8.0, 8.5] {
            assert!((j0_series(x) - j0_miller(x)).abs() < 1e-13, "{x}");
        }
        for x in [24.0, 25.0, 26.0] {
            assert!((j0_miller(x) - j0_hankel(x)).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn known_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-16);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-15);
    }

    #[test]
    fn profile_limits() {
        for d in 1..=3 {
            let p = RadialProfile::new(d).unwrap();
            assert!((p.eval(0.0) - p.at_zero()).abs() < 1e-15);
        }
        assert!(RadialProfile::new(4).is_err());
    }
}
