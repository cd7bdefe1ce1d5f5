//! Dense materialization and structural checks.
//!
//! Everything here is `O(N³)` or worse and meant for small `N`: test oracles
//! and the `verify` command.

use std::fmt;

use crate::unitary::StructuredUnitary;
use crate::C64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let data = (0..n * n).map(|idx| f(idx / n, idx % n)).collect();
        DenseMatrix { n, data }
    }

    pub fn from_unitary(u: &StructuredUnitary) -> Self {
        Self::from_fn(u.size(), |r, c| u.entry(r, c))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.n + col] = value;
    }

    pub fn column(&self, col: usize) -> Vec<C64> {
        (0..self.n).map(|r| self.get(r, col)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |r, c| self.get(c, r).conj())
    }

    pub fn mul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|r| self.data[r * self.n..(r + 1) * self.n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `diag(d)`.
    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, *x);
        }
        m
    }
}

pub const UNITARITY_TOL: f64 = 1e-10;
pub const MAGNITUDE_TOL: f64 = 1e-12;
pub const CLOSURE_TOL: f64 = 1e-10;

/// First structural property a candidate matrix fails.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    /// `(UᴴU)[row, col]` deviates from the identity.
    NotUnitary { row: usize, col: usize, deviation: f64 },
    /// Entry magnitude differs from `1/√N`.
    EntryMagnitude { row: usize, col: usize, magnitude: f64 },
    /// `√N·u_i ∘ √N·u_j` matches no scaled column.
    NotClosed { i: usize, j: usize },
    /// Column 0 is not the constant vector `1/√N`.
    FirstColumnNotConstant { row: usize },
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // 1-based for humans
        match self {
            ConstraintViolation::NotUnitary { row, col, deviation } => write!(
                f,
                "unitarity: (UᴴU)[{}, {}] deviates from identity by {deviation:.3e}",
                row + 1,
                col + 1
            ),
            ConstraintViolation::EntryMagnitude { row, col, magnitude } => write!(
                f,
                "entry magnitude: |U[{}, {}]| = {magnitude:.17} is not 1/√N",
                row + 1,
                col + 1
            ),
            ConstraintViolation::NotClosed { i, j } => write!(
                f,
                "closure: product of columns {} and {} is not a column",
                i + 1,
                j + 1
            ),
            ConstraintViolation::FirstColumnNotConstant { row } => {
                write!(f, "first column: entry {} is not 1/√N", row + 1)
            }
        }
    }
}

impl std::error::Error for ConstraintViolation {}

/// Multiplication table of the scaled columns: `table[i][j] = k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureTable {
    pub table: Vec<Vec<usize>>,
}

pub fn check_unitarity(m: &DenseMatrix) -> Result<(), ConstraintViolation> {
    let gram = m.adjoint().mul(m);
    let n = m.size();
    for row in 0..n {
        for col in 0..n {
            let target = if row == col { 1.0 } else { 0.0 };
            let deviation = (gram.get(row, col) - target).norm();
            if deviation > UNITARITY_TOL {
                return Err(ConstraintViolation::NotUnitary { row, col, deviation });
            }
        }
    }
    Ok(())
}

pub fn check_entry_magnitudes(m: &DenseMatrix) -> Result<(), ConstraintViolation> {
    let target = 1.0 / (m.size() as f64).sqrt();
    for row in 0..m.size() {
        for col in 0..m.size() {
            let magnitude = m.get(row, col).norm();
            if (magnitude - target).abs() > MAGNITUDE_TOL {
                return Err(ConstraintViolation::EntryMagnitude { row, col, magnitude });
            }
        }
    }
    Ok(())
}

pub fn check_first_column(m: &DenseMatrix) -> Result<(), ConstraintViolation> {
    let target = C64::new(1.0 / (m.size() as f64).sqrt(), 0.0);
    for row in 0..m.size() {
        if (m.get(row, 0) - target).norm() > MAGNITUDE_TOL {
            return Err(ConstraintViolation::FirstColumnNotConstant { row });
        }
    }
    Ok(())
}

/// Brute-force search for the closure table.
pub fn check_closure(m: &DenseMatrix) -> Result<ClosureTable, ConstraintViolation> {
    let n = m.size();
    let root_n = (n as f64).sqrt();
    let scaled: Vec<Vec<C64>> = (0..n)
        .map(|c| m.column(c).into_iter().map(|x| x * root_n).collect())
        .collect();
    let mut table = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in i..n {
            let product: Vec<C64> = scaled[i].iter().zip(&scaled[j]).map(|(a, b)| a * b).collect();
            let k = scaled
                .iter()
                .position(|col| col.iter().zip(&product).all(|(a, b)| (a - b).norm() <= CLOSURE_TOL))
                .ok_or(ConstraintViolation::NotClosed { i, j })?;
            table[i][j] = k;
            table[j][i] = k;
        }
    }
    Ok(ClosureTable { table })
}

/// Runs every structural check, cheapest first.
pub fn verify_constraints(m: &DenseMatrix) -> Result<ClosureTable, ConstraintViolation> {
    check_entry_magnitudes(m)?;
    check_first_column(m)?;
    check_unitarity(m)?;
    check_closure(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::TransformKind;

    #[test]
    fn both_families_pass_exhaustively() {
        for kind in [TransformKind::Fourier, TransformKind::Hadamard] {
            for log_n in 0..=6 {
                let n = 1usize << log_n;
                let u = StructuredUnitary::new(kind, n).unwrap();
                let closure = verify_constraints(&DenseMatrix::from_unitary(&u))
                    .unwrap_or_else(|e| panic!("{kind} N={n}: {e}"));
                for i in 0..n {
                    for j in 0..n {
                        assert_eq!(closure.table[i][j], u.product_index(i, j).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn non_power_of_two_fourier_passes() {
        let u = StructuredUnitary::fourier(12).unwrap();
        verify_constraints(&DenseMatrix::from_unitary(&u)).unwrap();
    }

    #[test]
    fn corrupted_entry_is_named() {
        let u = StructuredUnitary::hadamard(8).unwrap();
        let mut m = DenseMatrix::from_unitary(&u);
        m.set(2, 3, m.get(2, 3) * 1.01);
        assert!(matches!(
            verify_constraints(&m),
            Err(ConstraintViolation::EntryMagnitude { row: 2, col: 3, .. })
        ));
    }

    #[test]
    fn closure_fails_for_generic_unitary() {
        // swapping two entries of one column keeps magnitudes
        let u = StructuredUnitary::hadamard(4).unwrap();
        let mut m = DenseMatrix::from_unitary(&u);
        let a = m.get(0, 1);
        m.set(0, 1, m.get(1, 1));
        m.set(1, 1, a);
        assert!(check_entry_magnitudes(&m).is_ok());
        assert!(check_closure(&m).is_err() || check_unitarity(&m).is_err());
    }
}
