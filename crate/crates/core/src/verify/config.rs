use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dg::{DGParams, Variant};
use crate::error::{LabError, Result};
use crate::operator::{GridSpec, PotentialSpec, DEFAULT_CAP};
use crate::pl::{EPS_MAX, EPS_MIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    pub box_length: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    #[default]
    Zero,
    /// amplitude * exp(-|x - c|^2 / width^2), c the grid center
    Bump { amplitude: f64, width: f64 },
    Hardy { a: f64, cutoff: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Allowed excess of a measured log-log slope over the predicted one.
    pub slope: f64,
    /// Relative agreement between grid and closed-form values, on top of the spectral bound.
    pub oracle: f64,
    /// Max/min ratio allowed for constants fitted across a sweep.
    pub spread: f64,
    /// Allowed ratio between complex-time and real-time constants.
    pub slack: f64,
    /// Allowed excess of a measured annulus decay exponent, in log2 units.
    pub decay: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slope: 0.1,
            oracle: 1e-6,
            spread: 2.0,
            slack: 4.0,
            decay: 0.15,
        }
    }
}

fn default_epsilon() -> f64 {
    0.5
}

fn default_kmax() -> u32 {
    8
}

fn default_center() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub alpha: f64,
    pub grid: GridConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    /// Arguments of z, radians.
    pub thetas: Vec<f64>,
    /// |z| values.
    pub moduli: Vec<f64>,
    /// r / |z|^{1/alpha} values for the tail and pointwise sweeps.
    #[serde(default)]
    pub scaled_r: Vec<f64>,
    /// Exponents of r_z = |z|^{1/alpha} (cos theta)^{-zeta}.
    #[serde(default)]
    pub zetas: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub exponents: Option<Exponents>,
    #[serde(default = "default_kmax")]
    pub kmax: u32,
    /// Measuring point per axis, as a fraction of the box.
    #[serde(default = "default_center")]
    pub center: f64,
    /// Scaled range used for tail-slope regressions.
    #[serde(default)]
    pub slope_window: Option<[f64; 2]>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn bad<T>(field: &str, msg: impl Into<String>) -> Result<T> {
    Err(LabError::Config {
        field: field.to_string(),
        msg: msg.into(),
    })
}

/// Field name and line from a toml error, e.g. "missing field `alpha`".
fn toml_error(text: &str, e: toml::de::Error) -> LabError {
    let msg = e.message().to_string();
    let named = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.starts_with("missing field") || msg.starts_with("unknown field"));
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].lines().count().max(1));
    let field = match (named, line) {
        (Some(f), _) => f.to_string(),
        (None, Some(l)) => format!("line {l}"),
        (None, None) => "document".to_string(),
    };
    LabError::Config { field, msg }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| toml_error(text, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.d, self.grid.n, self.grid.box_length).or_else(|e| bad("grid", e.to_string()))
    }

    pub fn potential_spec(&self, grid: &GridSpec) -> PotentialSpec {
        match &self.potential {
            PotentialConfig::Zero => PotentialSpec::Zero,
            PotentialConfig::Bump { amplitude, width } => PotentialSpec::bump(grid, *amplitude, *width),
            PotentialConfig::Hardy { a, cutoff } => PotentialSpec::Hardy { a: *a, cutoff: *cutoff },
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self.potential, PotentialConfig::Zero)
    }

    pub fn exponents(&self) -> Result<Exponents> {
        match self.exponents {
            Some(e) => Ok(e),
            None => bad("exponents", "this experiment needs p, q, sigma and beta"),
        }
    }

    /// Flat index of the measuring node (center * n on every axis).
    pub fn center_node(&self, grid: &GridSpec) -> usize {
        let m = ((self.center * grid.n as f64).round() as usize).min(grid.n - 1);
        let idx = [m; 3];
        grid.flat_index(&idx[..grid.d])
    }

    /// Module preconditions that do not depend on the experiment.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha", format!("must be positive, got {}", self.alpha));
        }
        let grid = self.grid_spec()?;
        if grid.len() > DEFAULT_CAP {
            return bad("grid", format!("n^d = {} exceeds {}", grid.len(), DEFAULT_CAP));
        }
        match &self.potential {
            PotentialConfig::Zero => {}
            PotentialConfig::Bump { amplitude, width } => {
                if !(amplitude.is_finite() && *width > 0.0 && width.is_finite()) {
                    return bad("potential", "bump needs finite amplitude and positive width");
                }
            }
            PotentialConfig::Hardy { a, cutoff } => {
                if !a.is_finite() || cutoff.is_some_and(|c| !(c > 0.0)) {
                    return bad("potential", "hardy needs finite a and positive cutoff");
                }
                let upper = (grid.d as f64).min(2.0);
                if !(self.alpha < upper) {
                    return bad("alpha", format!("hardy potential needs alpha < min(2, d) = {upper}"));
                }
            }
        }
        if self.thetas.is_empty() {
            return bad("thetas", "empty");
        }
        if let Some(t) = self.thetas.iter().find(|t| !(t.abs() < FRAC_PI_2)) {
            return bad("thetas", format!("|theta| must be < pi/2, got {t}"));
        }
        if self.moduli.is_empty() {
            return bad("moduli", "empty");
        }
        if let Some(m) = self.moduli.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return bad("moduli", format!("|z| must be positive, got {m}"));
        }
        if let Some(s) = self.scaled_r.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return bad("scaled_r", format!("must be nonnegative, got {s}"));
        }
        if let Some(z) = self.zetas.iter().find(|z| !(**z >= 0.0 && z.is_finite())) {
            return bad("zetas", format!("zeta must be nonnegative, got {z}"));
        }
        if !(self.epsilon > EPS_MIN && self.epsilon < EPS_MAX) {
            return bad("epsilon", format!("must lie in ({EPS_MIN}, {EPS_MAX}), got {}", self.epsilon));
        }
        if !(0.0..1.0).contains(&self.center) {
            return bad("center", format!("must lie in [0, 1), got {}", self.center));
        }
        if let Some([a, b]) = self.slope_window {
            if !(a > 0.0 && b > a) {
                return bad("slope_window", format!("need 0 < lo < hi, got [{a}, {b}]"));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.slope", t.slope),
            ("tolerances.oracle", t.oracle),
            ("tolerances.decay", t.decay),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(name, format!("must be nonnegative, got {v}"));
            }
        }
        for (name, v) in [("tolerances.spread", t.spread), ("tolerances.slack", t.slack)] {
            if !(v >= 1.0) {
                return bad(name, format!("must be >= 1, got {v}"));
            }
        }
        if let Some(e) = self.exponents {
            DGParams::new(e.p, e.q, e.sigma, e.beta, Variant::Plain)
                .validate_ranges()
                .or_else(|err| bad("exponents", err.to_string()))?;
        }
        Ok(())
    }
}

/// Parse and check the experiment-independent preconditions.
pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
experiment = "cor_plapplied"
alpha = 1.0
thetas = [0.0]
moduli = [1.0]
[grid]
d = 1
n = 64
box_length = 16.0
"#;

    #[test]
    fn minimal_loads_with_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.epsilon, 0.5);
        assert_eq!(c.kmax, 8);
        assert_eq!(c.potential, PotentialConfig::Zero);
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn missing_field_is_named() {
        let text = MINIMAL.replace("alpha = 1.0\n", "");
        match ExperimentConfig::from_toml(&text) {
            Err(LabError::Config { field, .. }) => assert_eq!(field, "alpha"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_are_named() {
        let text = MINIMAL.replace("thetas = [0.0]", "thetas = [1.6]");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(LabError::Config { field, .. }) if field == "thetas"));
        let text = MINIMAL.replace("n = 64", "n = 8192");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(LabError::Config { field, .. }) if field == "grid"));
        let text = format!("{MINIMAL}\nbogus = 1\n");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(LabError::Config { field, .. }) if field == "bogus"));
    }
}
