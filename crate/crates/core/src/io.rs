//! Plain-text instance and result files.
//!
//! Instance:
//!
//! ```text
//! N M K seed kind
//! ω₁ ω₂ … ω_M            (1-based row indices)
//! re im                  (N lines: x_true)
//! re im                  (M lines: y)
//! ```
//!
//! Result:
//!
//! ```text
//! N iterations residual_norm solver mode
//! λ₁ λ₂ …                (1-based support, possibly empty)
//! re im                  (one line per support entry)
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64`. The noise vector is not stored; reading an instance recovers it as
//! `y − Φ·x_true`.

use std::io::{BufRead, Write};

use crate::sensing::{ProblemInstance, RowSelection, SensingOperator};
use crate::unitary::{StructuredUnitary, TransformKind};
use crate::{Error, Result, C64};

fn write_complex<W: Write>(w: &mut W, z: C64) -> std::io::Result<()> {
    writeln!(w, "{:.16e} {:.16e}", z.re, z.im)
}

fn write_indices<W: Write>(w: &mut W, idx: &[usize]) -> std::io::Result<()> {
    let line: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    writeln!(w, "{}", line.join(" "))
}

pub fn write_instance<W: Write>(mut w: W, inst: &ProblemInstance) -> Result<()> {
    let op = &inst.operator;
    writeln!(w, "{} {} {} {} {}", op.n(), op.m(), inst.k, inst.seed, op.kind())?;
    write_indices(&mut w, op.selection().rows())?;
    for &z in inst.x_true.iter().chain(&inst.y) {
        write_complex(&mut w, z)?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(r: R) -> Self {
        Lines { inner: r.lines(), line: 0 }
    }

    fn next_line(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn parse<T: std::str::FromStr>(&self, token: Option<&str>, what: &str) -> Result<T> {
        let token = token.ok_or_else(|| self.err(format!("missing {what}")))?;
        token.parse().map_err(|_| self.err(format!("invalid {what} `{token}`")))
    }

    fn indices(&mut self) -> Result<Vec<usize>> {
        let line = self.next_line()?;
        line.split_whitespace()
            .map(|tok| match tok.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i - 1),
                _ => Err(self.err(format!("invalid 1-based index `{tok}`"))),
            })
            .collect()
    }

    fn complex(&mut self) -> Result<C64> {
        let line = self.next_line()?;
        let mut it = line.split_whitespace();
        let re = self.parse(it.next(), "real part")?;
        let im = self.parse(it.next(), "imaginary part")?;
        if it.next().is_some() {
            return Err(self.err("trailing tokens"));
        }
        Ok(C64::new(re, im))
    }

    fn complexes(&mut self, count: usize) -> Result<Vec<C64>> {
        (0..count).map(|_| self.complex()).collect()
    }

    fn expect_end(&mut self) -> Result<()> {
        for rest in self.inner.by_ref() {
            self.line += 1;
            if !rest?.trim().is_empty() {
                return Err(Error::Parse { line: self.line, msg: "trailing content".into() });
            }
        }
        Ok(())
    }
}

pub fn read_instance<R: BufRead>(r: R) -> Result<ProblemInstance> {
    let mut lines = Lines::new(r);
    let header = lines.next_line()?;
    let mut it = header.split_whitespace();
    let n: usize = lines.parse(it.next(), "N")?;
    let m: usize = lines.parse(it.next(), "M")?;
    let k: usize = lines.parse(it.next(), "K")?;
    let seed: u64 = lines.parse(it.next(), "seed")?;
    let kind: TransformKind = lines.parse(it.next(), "kind")?;

    let rows = lines.indices()?;
    if rows.len() != m {
        return Err(lines.err(format!("expected {m} row indices, found {}", rows.len())));
    }
    let op = SensingOperator::new(StructuredUnitary::new(kind, n)?, RowSelection::new(n, rows)?)?;
    let x_true = lines.complexes(n)?;
    let y = lines.complexes(m)?;
    lines.expect_end()?;

    let fit = op.apply(&x_true)?;
    let noise = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    Ok(ProblemInstance { operator: op, x_true, y, noise, k, seed })
}

/// Contents of a result file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub n: usize,
    pub iterations: usize,
    pub residual_norm: f64,
    pub solver: String,
    pub mode: String,
    pub support: Vec<usize>,
    pub coefficients: Vec<C64>,
}

pub fn write_result<W: Write>(mut w: W, rec: &ResultRecord) -> Result<()> {
    writeln!(
        w,
        "{} {} {:.16e} {} {}",
        rec.n, rec.iterations, rec.residual_norm, rec.solver, rec.mode
    )?;
    write_indices(&mut w, &rec.support)?;
    for &z in &rec.coefficients {
        write_complex(&mut w, z)?;
    }
    Ok(())
}

pub fn read_result<R: BufRead>(r: R) -> Result<ResultRecord> {
    let mut lines = Lines::new(r);
    let header = lines.next_line()?;
    let mut it = header.split_whitespace();
    let n = lines.parse(it.next(), "N")?;
    let iterations = lines.parse(it.next(), "iteration count")?;
    let residual_norm = lines.parse(it.next(), "residual norm")?;
    let solver = lines.parse(it.next(), "solver")?;
    let mode = lines.parse(it.next(), "mode")?;
    let support = lines.indices()?;
    let coefficients = lines.complexes(support.len())?;
    lines.expect_end()?;
    Ok(ResultRecord { n, iterations, residual_norm, solver, mode, support, coefficients })
}
