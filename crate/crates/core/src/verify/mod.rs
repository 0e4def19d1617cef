//! Configured end-to-end verification runs with CSV and JSON reports.

mod common;
mod config;
mod experiments;
mod report;

use std::path::Path;

pub use common::{spectral_tail_bound, TorusOracle};
pub use config::{read_config, ExperimentConfig, Exponents, GridConfig, PotentialConfig, Tolerances};
pub use experiments::{admissibility, CorLpComplex, CorPlApplied, CorPlApplied2, CorPlggecor, ThmPlgge};
pub use report::{emit_report, Counts, Fingerprint, Outcome, Status, Summary, VerificationRow};

use crate::error::{LabError, Result};

pub trait Experiment: Send + Sync {
    fn id(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    /// Preconditions specific to this experiment, checked before any work.
    fn validate(&self, cfg: &ExperimentConfig) -> Result<()>;
    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome>;
}

pub fn registry() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(CorPlApplied),
        Box::new(CorPlApplied2),
        Box::new(ThmPlgge),
        Box::new(CorPlggecor),
        Box::new(CorLpComplex),
    ]
}

pub fn find(id: &str) -> Option<Box<dyn Experiment>> {
    registry().into_iter().find(|e| e.id() == id)
}

fn lookup(cfg: &ExperimentConfig) -> Result<Box<dyn Experiment>> {
    find(&cfg.experiment).ok_or_else(|| {
        let known: Vec<&str> = registry().iter().map(|e| e.id()).collect();
        LabError::Config {
            field: "experiment".into(),
            msg: format!("unknown id {:?}; known: {}", cfg.experiment, known.join(", ")),
        }
    })
}

/// Reads a config and re-validates every precondition of its experiment.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let cfg = read_config(path)?;
    lookup(&cfg)?.validate(&cfg)?;
    Ok(cfg)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let exp = lookup(cfg)?;
    exp.validate(cfg)?;
    exp.run(cfg)
}
