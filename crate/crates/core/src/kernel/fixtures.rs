//! Reader for the plain-text reference tables shipped under `fixtures/`.

use num_complex::Complex64;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy)]
pub struct KernelReference {
    pub alpha: f64,
    pub d: usize,
    pub z: Complex64,
    pub r: f64,
    pub value: Complex64,
    pub abs_err: f64,
}

fn fields(text: &str, ncol: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| LabError::Config {
                field: format!("line {}", i + 1),
                msg: e.to_string(),
            })?;
        if v.len() != ncol {
            return Err(LabError::Config {
                field: format!("line {}", i + 1),
                msg: format!("expected {ncol} columns, got {}", v.len()),
            });
        }
        rows.push(v);
    }
    Ok(rows)
}

/// Columns: alpha d re_z im_z r re_K im_K abs_err
pub fn parse_kernel_table(text: &str) -> Result<Vec<KernelReference>> {
    Ok(fields(text, 8)?
        .into_iter()
        .map(|v| KernelReference {
            alpha: v[0],
            d: v[1] as usize,
            z: Complex64::new(v[2], v[3]),
            r: v[4],
            value: Complex64::new(v[5], v[6]),
            abs_err: v[7],
        })
        .collect())
}

/// Columns: x J0(x)
pub fn parse_bessel_table(text: &str) -> Result<Vec<(f64, f64)>> {
    Ok(fields(text, 2)?.into_iter().map(|v| (v[0], v[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let t = "# header\n1 2 0.5 -0.5 1 0.1 0.2 1e-20\n\n";
        let r = parse_kernel_table(t).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].d, 2);
        assert!(parse_kernel_table("1 2 3\n").is_err());
        assert!(parse_bessel_table("1 x\n").is_err());
    }
}
