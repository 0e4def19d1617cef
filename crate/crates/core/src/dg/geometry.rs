//! Randomized check of the ball/annulus index relations in R^d.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::annulus::annulus_index;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GeomReport {
    pub trials: usize,
    /// configurations with A_2(z,r,j) ∩ A_2(x,r0,k) witnessed, j,k >= 2
    pub witnessed_annuli: usize,
    /// configurations with A_2(z,r,j) ∩ B_x(r0) witnessed, j >= 1
    pub witnessed_ball: usize,
    pub violations_annuli: usize,
    pub violations_ball: usize,
}

impl GeomReport {
    pub fn violations(&self) -> usize {
        self.violations_annuli + self.violations_ball
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.gen_range(-2.0..2.0))
}

const REL: f64 = 1e-12;

/// z = 0, x with |x| <= r + r0; witnesses y drawn from A_2(0,r,j) and from B_x(r0).
pub fn check_geom_annuli(d: usize, trials: usize, seed: u64) -> Result<GeomReport> {
    if !(1..=3).contains(&d) {
        return domain(format!("dimension {d} not in 1..=3"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = GeomReport {
        trials,
        witnessed_annuli: 0,
        witnessed_ball: 0,
        violations_annuli: 0,
        violations_ball: 0,
    };
    for _ in 0..trials {
        let r = log_uniform(&mut rng);
        let r0 = log_uniform(&mut rng);
        // occasionally the concentric equal-radius case
        let (x, r0) = if rng.gen_bool(0.01) {
            (vec![0.0; d], r)
        } else {
            let u = unit_vector(&mut rng, d);
            let s = (r + r0) * rng.gen::<f64>();
            (u.into_iter().map(|a| a * s).collect::<Vec<_>>(), r0)
        };

        // annulus of z = 0 against annuli of x
        let j: u32 = rng.gen_range(2..=14);
        let rad = r * 2f64.powi(j as i32 - 1) * (1.0 + rng.gen::<f64>());
        let y: Vec<f64> = unit_vector(&mut rng, d).into_iter().map(|a| a * rad).collect();
        if annulus_index(norm(&y), r) == j {
            let dxy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let k = annulus_index(norm(&dxy), r0);
            if k >= 2 {
                rep.witnessed_annuli += 1;
                let lo = 2f64.powi(k as i32 - 3) * r0;
                let hi = 2f64.powi(k as i32 + 3) * r0;
                let mid = 2f64.powi(j as i32) * r;
                if mid < lo * (1.0 - REL) || mid > hi * (1.0 + REL) {
                    rep.violations_annuli += 1;
                }
            }
        }

        // ball of x against annuli of z = 0
        let s = r0 * rng.gen::<f64>().powf(1.0 / d as f64);
        let y: Vec<f64> = unit_vector(&mut rng, d)
            .into_iter()
            .zip(&x)
            .map(|(a, b)| b + a * s)
            .collect();
        let j = annulus_index(norm(&y), r);
        if j >= 1 {
            rep.witnessed_ball += 1;
            if (2f64.powi(j as i32 - 1) - 1.0) * r > 2.0 * r0 * (1.0 + REL) {
                rep.violations_ball += 1;
            }
        }
    }
    Ok(rep)
}
