use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::error::{LabError, Result};

/// Potential V added as a diagonal to the kinetic part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// Values at the grid nodes, in flat index order.
    BoundedSample { values: Vec<f64> },
    /// a / max(|x - c|, cutoff)^alpha with c the grid center; cutoff defaults to h.
    Hardy { a: f64, cutoff: Option<f64> },
}

impl PotentialSpec {
    /// Gaussian bump amplitude * exp(-|x - c|^2 / width^2) centered on the grid.
    pub fn bump(grid: &GridSpec, amplitude: f64, width: f64) -> Self {
        let c = grid.center();
        let values = (0..grid.len())
            .map(|i| {
                let r = grid.dist(c, i);
                amplitude * (-(r * r) / (width * width)).exp()
            })
            .collect();
        PotentialSpec::BoundedSample { values }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PotentialSpec::Zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::BoundedSample { values } => values.iter().all(|v| *v >= 0.0),
            PotentialSpec::Hardy { a, .. } => *a >= 0.0,
        }
    }

    /// Diagonal values on the grid.
    pub fn sample(&self, grid: &GridSpec, alpha: f64) -> Result<Vec<f64>> {
        match self {
            PotentialSpec::Zero => Ok(vec![0.0; grid.len()]),
            PotentialSpec::BoundedSample { values } => {
                if values.len() != grid.len() {
                    return Err(LabError::Assembly(format!(
                        "bounded_sample has {} values, grid has {} nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(LabError::Assembly(format!("bounded_sample value {} is not finite", v)));
                }
                Ok(values.clone())
            }
            PotentialSpec::Hardy { a, cutoff } => {
                let upper = (grid.d as f64).min(2.0);
                if !(alpha > 0.0 && alpha < upper) {
                    return Err(LabError::Assembly(format!(
                        "hardy potential needs alpha in (0, {}), got {}",
                        upper, alpha
                    )));
                }
                let cut = cutoff.unwrap_or_else(|| grid.h());
                if !(cut > 0.0 && cut.is_finite()) {
                    return Err(LabError::Assembly(format!("hardy cutoff {} must be positive", cut)));
                }
                let c = grid.center();
                Ok((0..grid.len())
                    .map(|i| a / grid.dist(c, i).max(cut).powf(alpha))
                    .collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_constraint() {
        let g = GridSpec::new(1, 16, 4.0).unwrap();
        let v = PotentialSpec::Hardy { a: 1.0, cutoff: None };
        assert!(v.sample(&g, 1.5).is_err());
        let s = v.sample(&g, 0.5).unwrap();
        let h = g.h();
        assert!((s[g.center()] - 1.0 / h.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sample_length_checked() {
        let g = GridSpec::new(1, 8, 4.0).unwrap();
        let v = PotentialSpec::BoundedSample { values: vec![0.0; 7] };
        assert!(v.sample(&g, 1.0).is_err());
    }
}
