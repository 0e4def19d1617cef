use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::bound::{pl_bound, PolyBoundHypothesis};
use crate::complex_time::ComplexTime;
use crate::error::{domain, LabError, Result};

pub const TOL_CLOSED_FORM: f64 = 1e-9;
pub const TOL_NUMERIC: f64 = 1e-6;

/// A holomorphic map on the right half-plane observed through its norm.
pub trait AnalyticWitness: Send + Sync {
    fn label(&self) -> &str;

    fn norm_at(&self, z: &ComplexTime) -> Result<f64>;

    /// Numerically computed witnesses get a looser certification tolerance.
    fn is_numeric(&self) -> bool {
        false
    }
}

pub struct ClosedFormWitness {
    label: String,
    f: Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
}

impl ClosedFormWitness {
    pub fn new(label: impl Into<String>, f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Box::new(f),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.f)(z)
    }
}

impl AnalyticWitness for ClosedFormWitness {
    fn label(&self) -> &str {
        &self.label
    }

    fn norm_at(&self, z: &ComplexTime) -> Result<f64> {
        Ok((self.f)(z.to_complex()).norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertStatus {
    Pass,
    BoundViolation,
    HypothesisViolation,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certification {
    pub label: String,
    pub n_samples: usize,
    pub max_ratio: f64,
    pub worst: ComplexTime,
    pub sector_violations: usize,
    pub axis_violations: usize,
    pub tol: f64,
    pub status: CertStatus,
}

struct Probe {
    ratio: f64,
    sector_bad: bool,
    axis_bad: bool,
}

fn probe(
    w: &dyn AnalyticWitness,
    hyp: &PolyBoundHypothesis,
    epsilon: f64,
    z: &ComplexTime,
    tol: f64,
) -> Result<Probe> {
    let fz = w.norm_at(z)?;
    let bound = pl_bound(hyp, z, epsilon)?;
    let s = ComplexTime::real(z.modulus())?;
    let fs = w.norm_at(&s)?;
    Ok(Probe {
        ratio: fz / bound,
        sector_bad: fz > hyp.sector_rhs(z) * (1.0 + tol),
        axis_bad: fs > hyp.axis_rhs(z.modulus()) * (1.0 + tol),
    })
}

pub fn certify_pl(
    witness: &dyn AnalyticWitness,
    hyp: &PolyBoundHypothesis,
    epsilon: f64,
    samples: &[ComplexTime],
) -> Result<Certification> {
    if samples.is_empty() {
        return Err(LabError::Empty("certify_pl needs at least one sample".into()));
    }
    hyp.validate()?;
    let tol = if witness.is_numeric() {
        TOL_NUMERIC
    } else {
        TOL_CLOSED_FORM
    };
    let probes: Vec<Probe> = samples
        .par_iter()
        .map(|z| probe(witness, hyp, epsilon, z, tol))
        .collect::<Result<_>>()?;
    let mut worst = 0usize;
    for (i, p) in probes.iter().enumerate() {
        if p.ratio.is_nan() {
            return domain(format!("ratio is NaN at sample {i}"));
        }
        if p.ratio > probes[worst].ratio {
            worst = i;
        }
    }
    let sector_violations = probes.iter().filter(|p| p.sector_bad).count();
    let axis_violations = probes.iter().filter(|p| p.axis_bad).count();
    let max_ratio = probes[worst].ratio;
    let status = if sector_violations + axis_violations > 0 {
        CertStatus::HypothesisViolation
    } else if max_ratio <= 1.0 + tol {
        CertStatus::Pass
    } else {
        CertStatus::BoundViolation
    };
    Ok(Certification {
        label: witness.label().to_string(),
        n_samples: samples.len(),
        max_ratio,
        worst: samples[worst],
        sector_violations,
        axis_violations,
        tol,
        status,
    })
}

/// Largest a2 such that (2.2) holds on the sampled real points, given the other
/// hypothesis fields; shrunk by `safety` to cover the gaps between samples.
pub fn fit_a2(
    witness: &dyn AnalyticWitness,
    a1: f64,
    a3: f64,
    beta1: f64,
    beta2: f64,
    beta3: f64,
    reals: &[f64],
    safety: f64,
) -> Result<f64> {
    if !(beta2 > 0.0) {
        return domain("fit_a2 needs beta2 > 0");
    }
    if reals.is_empty() {
        return Err(LabError::Empty("fit_a2 needs real samples".into()));
    }
    let mut best = f64::INFINITY;
    for &s in reals {
        let f = witness.norm_at(&ComplexTime::real(s)?)?;
        if f == 0.0 {
            continue;
        }
        // a1 s^{-b1} (s/a2)^{b2} (a3/s)^{b3} >= f  <=>  a2^{b2} <= a1 s^{b2-b1} (a3/s)^{b3} / f
        let cap = (a1 * s.powf(beta2 - beta1) * (a3 / s).powf(beta3) / f).powf(1.0 / beta2);
        best = best.min(cap);
    }
    if !best.is_finite() {
        return domain("fit_a2 found no constraint");
    }
    Ok(best * safety)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<ComplexTime> {
        let mut v = Vec::new();
        for i in 0..40 {
            let m = 10f64.powf(-2.0 + 4.0 * i as f64 / 39.0);
            for j in 0..15 {
                let th = -1.5 + 3.0 * j as f64 / 14.0;
                v.push(ComplexTime::new(m, th).unwrap());
            }
        }
        v
    }

    #[test]
    fn inverse_power_passes() {
        let w = ClosedFormWitness::new("1/z", |z| z.inv());
        let h = PolyBoundHypothesis::new(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let c = certify_pl(&w, &h, 0.5, &grid()).unwrap();
        assert_eq!(c.status, CertStatus::Pass);
        assert!(c.max_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn empty_samples_rejected() {
        let w = ClosedFormWitness::new("1/z", |z| z.inv());
        let h = PolyBoundHypothesis::new(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(certify_pl(&w, &h, 0.5, &[]), Err(LabError::Empty(_))));
    }

    #[test]
    fn violator_is_a_hypothesis_failure() {
        let w = ClosedFormWitness::new("1/z", |z| z.inv());
        let h = PolyBoundHypothesis::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let c = certify_pl(&w, &h, 0.5, &grid()).unwrap();
        assert_eq!(c.status, CertStatus::HypothesisViolation);
        assert!(c.axis_violations > 0);
    }
}
