use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

/// One measured inequality or identity. `rhs` is the theoretical shape without
/// the constant; `constant` is the fitted constant of the row's group, so a
/// bound row passes when ratio = lhs / rhs <= constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRow {
    pub experiment: String,
    pub check: String,
    pub theta: Option<f64>,
    pub modulus: Option<f64>,
    pub zeta: Option<f64>,
    pub r: Option<f64>,
    pub k: Option<u32>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub constant: Option<f64>,
    pub ratio: Option<f64>,
    pub status: Status,
    pub note: String,
}

impl VerificationRow {
    pub fn new(experiment: &str, check: &str) -> Self {
        VerificationRow {
            experiment: experiment.to_string(),
            check: check.to_string(),
            theta: None,
            modulus: None,
            zeta: None,
            r: None,
            k: None,
            lhs: None,
            rhs: None,
            constant: None,
            ratio: None,
            status: Status::Skip,
            note: String::new(),
        }
    }

    pub fn at(mut self, theta: f64, modulus: f64) -> Self {
        self.theta = Some(theta);
        self.modulus = Some(modulus);
        self
    }

    pub fn zeta(mut self, zeta: f64) -> Self {
        self.zeta = Some(zeta);
        self
    }

    pub fn radius(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    /// lhs, rhs and ratio = lhs / rhs.
    pub fn values(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self.ratio = Some(lhs / rhs);
        self
    }

    pub fn status(mut self, s: Status) -> Self {
        self.status = s;
        self
    }

    pub fn pass_if(self, ok: bool) -> Self {
        self.status(Status::from_bool(ok))
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn skip(self, reason: impl Into<String>) -> Self {
        self.status(Status::Skip).note(reason)
    }

    pub const CSV_HEADER: &'static str =
        "experiment,check,theta,modulus,zeta,r,k,lhs,rhs,constant,ratio,status,note";

    pub fn csv_line(&self) -> String {
        let f = |v: Option<f64>| match v {
            Some(x) if x.is_finite() => format!("{x:.15e}"),
            Some(x) => x.to_string(),
            None => String::new(),
        };
        let note: String = self
            .note
            .chars()
            .map(|c| if matches!(c, ',' | '\n' | '\r' | '"') { ';' } else { c })
            .collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.check,
            f(self.theta),
            f(self.modulus),
            f(self.zeta),
            f(self.r),
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            f(self.lhs),
            f(self.rhs),
            f(self.constant),
            f(self.ratio),
            self.status.as_str(),
            note
        )
    }
}

/// Rows plus the named fitted constants of one experiment run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub rows: Vec<VerificationRow>,
    pub constants: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn push(&mut self, row: VerificationRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Outcome) {
        self.rows.extend(other.rows);
        self.constants.extend(other.constants);
    }

    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for r in &self.rows {
            match r.status {
                Status::Pass => c.pass += 1,
                Status::Fail => c.fail += 1,
                Status::Skip => c.skip += 1,
            }
        }
        c
    }

    /// True iff every non-skipped row passes and at least one row was judged.
    pub fn passed(&self) -> bool {
        let c = self.counts();
        c.fail == 0 && c.pass > 0
    }

    pub fn rows_for<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a VerificationRow> + 'a {
        self.rows.iter().filter(move |r| r.check == check)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(200 * (self.rows.len() + 1));
        s.push_str(VerificationRow::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    pub fn summary(&self, cfg: &ExperimentConfig) -> Summary {
        let mut failed: Vec<String> = self
            .rows
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(|r| r.check.clone())
            .collect();
        failed.sort();
        failed.dedup();
        Summary {
            experiment: cfg.experiment.clone(),
            seed: cfg.seed,
            counts: self.counts(),
            passed: self.passed(),
            failed_checks: failed,
            constants: self.constants.clone(),
            environment: Fingerprint::current(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
}

impl Fingerprint {
    pub fn current() -> Self {
        Fingerprint {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub seed: u64,
    pub counts: Counts,
    pub passed: bool,
    pub failed_checks: Vec<String>,
    /// Printed with 15 significant digits so the JSON text is stable.
    #[serde(serialize_with = "fixed_map")]
    pub constants: BTreeMap<String, f64>,
    pub environment: Fingerprint,
}

fn fixed_map<S: serde::Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        let mut text = String::new();
        let _ = write!(text, "{v:.15e}");
        map.serialize_entry(k, &text)?;
    }
    map.end()
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Writes `<id>.csv` and `<id>.json` into `dir` and returns both paths.
pub fn emit_report(outcome: &Outcome, cfg: &ExperimentConfig, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", cfg.experiment));
    let json = dir.join(format!("{}.json", cfg.experiment));
    std::fs::write(&csv, outcome.to_csv())?;
    std::fs::write(&json, outcome.summary(cfg).to_json())?;
    Ok((csv, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_line_has_fixed_columns() {
        let row = VerificationRow::new("x", "bound")
            .at(0.5, 1.0)
            .values(1.0, 3.0)
            .pass_if(true)
            .note("a, b");
        let line = row.csv_line();
        assert_eq!(line.split(',').count(), VerificationRow::CSV_HEADER.split(',').count());
        assert!(line.contains("3.333333333333333e-1"));
        assert!(line.ends_with("pass,a; b"));
    }

    #[test]
    fn skipped_rows_do_not_fail() {
        let mut o = Outcome::default();
        o.push(VerificationRow::new("x", "a").pass_if(true));
        o.push(VerificationRow::new("x", "b").skip("gate"));
        assert!(o.passed());
        o.push(VerificationRow::new("x", "c").pass_if(false));
        assert!(!o.passed());
    }
}
