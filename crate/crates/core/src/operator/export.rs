//! Plain-text matrix format.
//!
//! ```text
//! # heatlab matrix v1
//! kind kernel|operator
//! grid <d> <n> <box_length> <periodic 0|1>
//! alpha <alpha>|none
//! z <re> <im>|none
//! rows <N> cols <N> complex <0|1>
//! <row 0: N values, or N re/im pairs, separated by spaces>
//! ...
//! ```
//! Values are written with 17 significant digits so a round trip is exact.

use std::io::{BufRead, Write};

use faer::Mat;
use num_complex::Complex64;

use super::discrete::DiscreteOperator;
use super::grid::{GridSpec, DEFAULT_CAP};
use super::kernel::{KernelMatrix, KernelSource};
use crate::complex_time::ComplexTime;
use crate::error::{LabError, Result};

const MAGIC: &str = "# heatlab matrix v1";

fn write_header(
    w: &mut dyn Write,
    kind: &str,
    grid: &GridSpec,
    alpha: Option<f64>,
    z: Option<ComplexTime>,
    complex: bool,
) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "kind {kind}")?;
    writeln!(
        w,
        "grid {} {} {:.17e} {}",
        grid.d,
        grid.n,
        grid.box_length,
        grid.periodic as u8
    )?;
    match alpha {
        Some(a) => writeln!(w, "alpha {:.17e}", a)?,
        None => writeln!(w, "alpha none")?,
    }
    match z {
        Some(z) => writeln!(w, "z {:.17e} {:.17e}", z.re(), z.im())?,
        None => writeln!(w, "z none")?,
    }
    writeln!(w, "rows {0} cols {0} complex {1}", grid.len(), complex as u8)?;
    Ok(())
}

pub fn write_kernel_text(k: &dyn KernelSource, w: &mut dyn Write) -> Result<()> {
    let grid = k.grid();
    write_header(w, "kernel", grid, None, k.time(), true)?;
    let nn = grid.len();
    let mut line = String::new();
    for i in 0..nn {
        line.clear();
        for j in 0..nn {
            let v = k.entry(i, j);
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{:.17e} {:.17e}", v.re, v.im));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_operator_text(op: &DiscreteOperator, w: &mut dyn Write) -> Result<()> {
    let grid = op.grid();
    write_header(w, "operator", grid, Some(op.alpha()), None, false)?;
    let h = op.assembled();
    let mut line = String::new();
    for i in 0..h.nrows() {
        line.clear();
        for j in 0..h.ncols() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{:.17e}", h.read(i, j)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn bad(line: usize, msg: impl Into<String>) -> LabError {
    LabError::Config {
        field: format!("line {line}"),
        msg: msg.into(),
    }
}

fn expect<'a>(
    lines: &mut impl Iterator<Item = (usize, std::io::Result<String>)>,
    key: &str,
    buf: &'a mut String,
) -> Result<(usize, Vec<&'a str>)> {
    let (no, l) = lines
        .next()
        .ok_or_else(|| bad(0, format!("missing '{key}' line")))?;
    *buf = l?;
    let parts: Vec<&str> = buf.split_whitespace().collect();
    if parts.first() != Some(&key) {
        return Err(bad(no + 1, format!("expected '{key}'")));
    }
    Ok((no + 1, parts))
}

fn num(line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| bad(line, format!("cannot parse number '{s}'")))
}

/// Header-described matrix read back from text.
pub struct TextMatrix {
    pub kind: String,
    pub grid: GridSpec,
    pub alpha: Option<f64>,
    pub z: Option<ComplexTime>,
    pub re: Mat<f64>,
    pub im: Mat<f64>,
}

impl TextMatrix {
    pub fn into_kernel(self) -> Result<KernelMatrix> {
        if self.kind != "kernel" {
            return Err(bad(2, format!("expected a kernel, found '{}'", self.kind)));
        }
        Ok(KernelMatrix::from_parts(self.grid, self.z, self.re, self.im))
    }
}

pub fn read_matrix_text(r: &mut dyn BufRead) -> Result<TextMatrix> {
    let mut lines = r.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    if first?.trim() != MAGIC {
        return Err(bad(1, "missing magic header"));
    }
    let mut buf = String::new();
    let (_, p) = expect(&mut lines, "kind", &mut buf)?;
    let kind = p.get(1).unwrap_or(&"").to_string();
    let mut buf = String::new();
    let (no, p) = expect(&mut lines, "grid", &mut buf)?;
    if p.len() != 5 {
        return Err(bad(no, "grid needs d n box_length periodic"));
    }
    let d: usize = p[1].parse().map_err(|_| bad(no, "bad d"))?;
    let n: usize = p[2].parse().map_err(|_| bad(no, "bad n"))?;
    let grid = GridSpec {
        d,
        n,
        box_length: num(no, p[3])?,
        cap: n.saturating_pow(d as u32).max(DEFAULT_CAP),
        periodic: p[4] == "1",
    };
    grid.validate().map_err(|e| bad(no, e.to_string()))?;
    let mut buf = String::new();
    let (no, p) = expect(&mut lines, "alpha", &mut buf)?;
    let alpha = match p.get(1) {
        Some(&"none") => None,
        Some(s) => Some(num(no, s)?),
        None => return Err(bad(no, "alpha value missing")),
    };
    let mut buf = String::new();
    let (no, p) = expect(&mut lines, "z", &mut buf)?;
    let z = match p.get(1) {
        Some(&"none") => None,
        Some(s) => {
            let re = num(no, s)?;
            let im = num(no, p.get(2).ok_or_else(|| bad(no, "z needs re im"))?)?;
            Some(ComplexTime::from_complex(Complex64::new(re, im)).map_err(|e| bad(no, e.to_string()))?)
        }
        None => return Err(bad(no, "z value missing")),
    };
    let mut buf = String::new();
    let (no, p) = expect(&mut lines, "rows", &mut buf)?;
    if p.len() != 6 {
        return Err(bad(no, "rows line needs: rows N cols N complex 0|1"));
    }
    let rows: usize = p[1].parse().map_err(|_| bad(no, "bad row count"))?;
    let cols: usize = p[3].parse().map_err(|_| bad(no, "bad column count"))?;
    let complex = p[5] == "1";
    if rows != grid.len() || cols != grid.len() {
        return Err(bad(no, "matrix size does not match the grid"));
    }
    let per = if complex { 2 } else { 1 };
    let mut re = Mat::<f64>::zeros(rows, cols);
    let mut im = Mat::<f64>::zeros(rows, cols);
    for i in 0..rows {
        let (no, l) = lines
            .next()
            .ok_or_else(|| bad(0, format!("missing row {i}")))?;
        let l = l?;
        let vals: Vec<&str> = l.split_whitespace().collect();
        if vals.len() != cols * per {
            return Err(bad(no + 1, format!("row {i} has {} values", vals.len())));
        }
        for j in 0..cols {
            re.write(i, j, num(no + 1, vals[j * per])?);
            if complex {
                im.write(i, j, num(no + 1, vals[j * per + 1])?);
            }
        }
    }
    Ok(TextMatrix {
        kind,
        grid,
        alpha,
        z,
        re,
        im,
    })
}
