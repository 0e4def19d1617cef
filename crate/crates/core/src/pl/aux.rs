use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use super::bound::PolyBoundHypothesis;
use crate::error::{domain, Result};

fn check(z: Complex64, gamma: f64) -> Result<()> {
    if !(z.re > 0.0) {
        return domain(format!("Re z must be positive, got {}", z.re));
    }
    if !(gamma > 0.0 && gamma < FRAC_PI_2) {
        return domain(format!("gamma must lie in (0, pi/2), got {gamma}"));
    }
    Ok(())
}

fn quadratic_exp(z: Complex64, a: f64, beta: f64, gamma: f64, sign: f64) -> Complex64 {
    let l = (z * a).ln();
    let i = Complex64::i();
    (l * (Complex64::new(1.0, 0.0) + i * l / (2.0 * gamma)) * (sign * beta)).exp()
}

/// exp(beta2 log(a2 z) (1 + i log(a2 z)/(2 gamma))), principal branch.
pub fn aux_h2(z: Complex64, a2: f64, beta2: f64, gamma: f64) -> Result<Complex64> {
    check(z, gamma)?;
    Ok(quadratic_exp(z, a2, beta2, gamma, 1.0))
}

/// exp(-beta3 log(a3 z) (1 + i log(a3 z)/(2 gamma))), principal branch.
pub fn aux_h3(z: Complex64, a3: f64, beta3: f64, gamma: f64) -> Result<Complex64> {
    check(z, gamma)?;
    Ok(quadratic_exp(z, a3, beta3, gamma, -1.0))
}

/// G(z) = z^{-beta1} F(1/z) H2(z) H3(z) for a scalar witness F.
pub fn three_lines_g<F>(f: F, hyp: &PolyBoundHypothesis, gamma: f64, z: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let h2 = aux_h2(z, hyp.a2, hyp.beta2, gamma)?;
    let h3 = aux_h3(z, hyp.a3, hyp.beta3, gamma)?;
    let zb = (z.ln() * (-hyp.beta1)).exp();
    Ok(zb * f(z.inv()) * h2 * h3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_modulus_on_ray() {
        let g = 1.1;
        let z = Complex64::from_polar(3.7, g);
        assert!((aux_h2(z, 0.4, 2.5, g).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!((aux_h3(z, 5.0, 1.5, g).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_exponent_is_one() {
        let z = Complex64::new(0.3, -0.2);
        assert_eq!(aux_h2(z, 2.0, 0.0, 1.0).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(aux_h3(z, 2.0, 0.0, 1.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn real_axis_moduli() {
        let s = 2.3;
        let z = Complex64::new(s, 0.0);
        let h2 = aux_h2(z, 0.7, 1.3, 0.9).unwrap();
        let h3 = aux_h3(z, 0.7, 1.3, 0.9).unwrap();
        assert!(h2.norm() <= (0.7 * s).powf(1.3) * (1.0 + 1e-14));
        assert!(h3.norm() <= (0.7 * s).powf(-1.3) * (1.0 + 1e-14));
    }

    #[test]
    fn rejects_bad_gamma() {
        let z = Complex64::new(1.0, 0.0);
        assert!(aux_h2(z, 1.0, 1.0, 0.0).is_err());
        assert!(aux_h3(z, 1.0, 1.0, FRAC_PI_2).is_err());
        assert!(aux_h2(Complex64::new(-1.0, 0.0), 1.0, 1.0, 1.0).is_err());
    }
}
