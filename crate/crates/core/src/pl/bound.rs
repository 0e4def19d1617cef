use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::complex_time::ComplexTime;
use crate::error::{domain, Result};

pub const EPS_MIN: f64 = 1e-6;
pub const EPS_MAX: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyBoundHypothesis {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

impl PolyBoundHypothesis {
    pub fn new(a1: f64, a2: f64, a3: f64, beta1: f64, beta2: f64, beta3: f64) -> Result<Self> {
        let h = Self {
            a1,
            a2,
            a3,
            beta1,
            beta2,
            beta3,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a1", self.a1), ("a2", self.a2), ("a3", self.a3)] {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return domain(format!("{name} must be nonnegative, got {v}"));
            }
        }
        Ok(())
    }

    /// Right side of (2.1) at z.
    pub fn sector_rhs(&self, z: &ComplexTime) -> f64 {
        self.a1 * (z.modulus() * z.cos_theta()).powf(-self.beta1)
    }

    /// Right side of (2.2) at the real point s.
    pub fn axis_rhs(&self, s: f64) -> f64 {
        self.a1 * s.powf(-self.beta1) * (self.a2 / s).powf(-self.beta2) * (self.a3 / s).powf(self.beta3)
    }

    /// (a2/|z|)^{-beta2} (a3/|z|)^{beta3}
    pub fn bracket(&self, modulus: f64) -> f64 {
        (self.a2 / modulus).powf(-self.beta2) * (self.a3 / modulus).powf(self.beta3)
    }
}

fn check_eps(epsilon: f64) -> Result<()> {
    if !(epsilon > EPS_MIN && epsilon < EPS_MAX) {
        return domain(format!(
            "epsilon must lie in ({EPS_MIN}, {EPS_MAX}), got {epsilon}"
        ));
    }
    Ok(())
}

pub fn gamma_eps(epsilon: f64, theta: f64) -> Result<f64> {
    check_eps(epsilon)?;
    if !(theta.is_finite() && theta.abs() < FRAC_PI_2) {
        return domain(format!("|theta| must be < pi/2, got {theta}"));
    }
    Ok(epsilon * theta.abs() + (1.0 - epsilon) * FRAC_PI_2)
}

/// `base * (1 - |theta|/gamma(eps, theta))`, the angular loss applied to a decay exponent.
pub fn sector_exponent(base: f64, epsilon: f64, theta: f64) -> Result<f64> {
    let g = gamma_eps(epsilon, theta)?;
    Ok(base * (1.0 - theta.abs() / g))
}

pub fn pl_bound(hyp: &PolyBoundHypothesis, z: &ComplexTime, epsilon: f64) -> Result<f64> {
    hyp.validate()?;
    let g = gamma_eps(epsilon, z.theta())?;
    let m = z.modulus();
    let expo = 1.0 - z.theta().abs() / g;
    let inner = epsilon.powf(-hyp.beta1) * hyp.bracket(m).powf(expo);
    Ok(hyp.a1 * (m * z.cos_theta()).powf(-hyp.beta1) * inner.min(1.0))
}

pub fn effective_exponent(beta: f64, d: usize, sigma: f64, epsilon: f64, theta: f64) -> Result<f64> {
    if d == 0 {
        return domain("d must be positive");
    }
    if !(sigma > 0.0) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    let base = beta - d as f64 / sigma;
    if base < 0.0 {
        return domain(format!("beta={beta} is below d/sigma={}", d as f64 / sigma));
    }
    sector_exponent(base, epsilon, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    #[test]
    fn gamma_examples() {
        assert!((gamma_eps(0.5, 0.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((gamma_eps(0.5, FRAC_PI_4).unwrap() - 3.0 * PI / 8.0).abs() < 1e-15);
        assert!((gamma_eps(2e-6, 1.0).unwrap() - FRAC_PI_2).abs() < 1e-5);
        assert!(gamma_eps(0.0, 0.1).is_err());
        assert!(gamma_eps(1.0, 0.1).is_err());
        assert!(gamma_eps(0.5, FRAC_PI_2).is_err());
    }

    #[test]
    fn degenerate_exponents_pick_one() {
        let h = PolyBoundHypothesis::new(2.0, 0.3, 7.0, 1.5, 0.0, 0.0).unwrap();
        let z = ComplexTime::new(0.8, 1.1).unwrap();
        let v = pl_bound(&h, &z, 0.3).unwrap();
        let want = 2.0 * (0.8 * 1.1f64.cos()).powf(-1.5);
        assert!((v - want).abs() <= 1e-14 * want);
    }

    #[test]
    fn effective_exponent_examples() {
        let v = effective_exponent(3.0, 1, 2.0, 0.5, FRAC_PI_4).unwrap();
        assert!((v - 2.5 / 3.0).abs() < 1e-14);
        assert_eq!(effective_exponent(0.5, 1, 2.0, 0.5, FRAC_PI_3).unwrap(), 0.0);
        assert!((effective_exponent(3.0, 1, 2.0, 0.5, 0.0).unwrap() - 2.5).abs() < 1e-15);
        assert!(effective_exponent(0.4, 1, 2.0, 0.5, 0.2).is_err());
    }

    #[test]
    fn epsilon_monotonicity_fails_off_axis_with_beta1_zero() {
        let h = PolyBoundHypothesis::new(1.0, 4.0, 1.0, 0.0, 2.0, 0.0).unwrap();
        let z = ComplexTime::new(1.0, FRAC_PI_4).unwrap();
        let lo = pl_bound(&h, &z, 0.2).unwrap();
        let hi = pl_bound(&h, &z, 0.8).unwrap();
        assert!(hi > lo);
    }
}
