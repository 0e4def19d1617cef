use super::free::{kernel_free, KernelQuery, QuadratureSpec};
use crate::complex_time::ComplexTime;
use crate::error::Result;
use crate::pl::AnalyticWitness;

/// z ↦ e^{-z(-Δ)^{α/2}}(x) at fixed |x| = r, evaluated by quadrature.
pub struct KernelWitness {
    pub alpha: f64,
    pub d: usize,
    pub r: f64,
    pub spec: QuadratureSpec,
    label: String,
}

impl KernelWitness {
    pub fn new(alpha: f64, d: usize, r: f64, spec: QuadratureSpec) -> Self {
        Self {
            alpha,
            d,
            r,
            spec,
            label: format!("free kernel alpha={alpha} d={d} r={r}"),
        }
    }
}

impl AnalyticWitness for KernelWitness {
    fn label(&self) -> &str {
        &self.label
    }

    fn norm_at(&self, z: &ComplexTime) -> Result<f64> {
        let q = KernelQuery::new(self.alpha, self.d, *z, self.r)?;
        Ok(kernel_free(&q, &self.spec)?.value.norm())
    }

    fn is_numeric(&self) -> bool {
        true
    }
}
