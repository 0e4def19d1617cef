//! Points of the open right half-plane in polar form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexTime {
    modulus: f64,
    theta: f64,
}

impl ComplexTime {
    pub fn new(modulus: f64, theta: f64) -> Result<Self> {
        if !(modulus.is_finite() && modulus > 0.0) {
            return domain(format!("modulus must be positive, got {modulus}"));
        }
        if !(theta.is_finite() && theta.abs() < FRAC_PI_2) {
            return domain(format!("|theta| must be < pi/2, got {theta}"));
        }
        let re = modulus * theta.cos();
        if !(re > 0.0) {
            return domain(format!("Re z = {re} is not positive"));
        }
        Ok(Self { modulus, theta })
    }

    pub fn real(t: f64) -> Result<Self> {
        Self::new(t, 0.0)
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.norm(), z.arg())
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn re(&self) -> f64 {
        self.modulus * self.theta.cos()
    }

    pub fn im(&self) -> f64 {
        self.modulus * self.theta.sin()
    }

    pub fn cos_theta(&self) -> f64 {
        self.theta.cos()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.theta)
    }

    pub fn conj(&self) -> Self {
        Self {
            modulus: self.modulus,
            theta: -self.theta,
        }
    }

    pub fn scale(&self, lambda: f64) -> Result<Self> {
        Self::new(self.modulus * lambda, self.theta)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::from_complex(self.to_complex() + other.to_complex())
    }
}
