//! The two admissible unitary families.
//!
//! Both have entries of magnitude `1/√N`, a constant first column, and
//! columns (scaled by `√N`) closed under element-wise multiplication. These
//! are the properties the fast correlation update relies on; [`dense`] checks
//! them for any materialized matrix.
//!
//! Conventions: the Fourier matrix has entries `exp(-2πi·m·n/N)/√N`, so
//! `forward` is the standard DFT scaled by `1/√N`. The Hadamard matrix is in
//! Sylvester order, `(-1)^popcount(m & n)/√N`.

pub mod dense;
mod kernels;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::cost_model::OpCount;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Fourier,
    Hadamard,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Fourier => "fourier",
            TransformKind::Hadamard => "hadamard",
        })
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fourier" | "dft" => Ok(TransformKind::Fourier),
            "hadamard" | "walsh" => Ok(TransformKind::Hadamard),
            other => Err(Error::InvalidParameter(format!("unknown transform kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Adjoint,
}

/// An `N × N` unitary transform from one of the two supported families.
///
/// Cheap to clone; the Fourier root table is shared.
#[derive(Clone)]
pub struct StructuredUnitary {
    kind: TransformKind,
    n: usize,
    scale: f64,
    /// `exp(-2πi k / N)` for `k < N`; empty for Hadamard.
    roots: Arc<[C64]>,
}

impl fmt::Debug for StructuredUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructuredUnitary")
            .field("kind", &self.kind)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for StructuredUnitary {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.n == other.n
    }
}

impl StructuredUnitary {
    /// Hadamard requires a power-of-two `n`; Fourier accepts any `n ≥ 1` and
    /// uses a dense `O(N²)` transform when `n` is not a power of two.
    pub fn new(kind: TransformKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { n, reason: "size must be positive" });
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidSize { n, reason: "size too large" });
        }
        let roots: Arc<[C64]> = match kind {
            TransformKind::Hadamard => {
                if !n.is_power_of_two() {
                    return Err(Error::InvalidSize {
                        n,
                        reason: "Hadamard size must be a power of two",
                    });
                }
                Arc::from(Vec::new())
            }
            TransformKind::Fourier => (0..n)
                .map(|k| {
                    let theta = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    let (s, c) = theta.sin_cos();
                    C64::new(c, s)
                })
                .collect(),
        };
        Ok(StructuredUnitary {
            kind,
            n,
            scale: 1.0 / (n as f64).sqrt(),
            roots,
        })
    }

    pub fn fourier(n: usize) -> Result<Self> {
        Self::new(TransformKind::Fourier, n)
    }

    pub fn hadamard(n: usize) -> Result<Self> {
        Self::new(TransformKind::Hadamard, n)
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `1/√N`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// False when transforms use the dense fallback.
    pub fn has_fast_transform(&self) -> bool {
        self.n.is_power_of_two()
    }

    /// Entry `U[row, col]` (0-based).
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        debug_assert!(row < self.n && col < self.n);
        match self.kind {
            TransformKind::Fourier => self.roots[(row as u64 * col as u64 % self.n as u64) as usize] * self.scale,
            TransformKind::Hadamard => {
                if (row & col).count_ones().is_multiple_of(2) {
                    C64::new(self.scale, 0.0)
                } else {
                    C64::new(-self.scale, 0.0)
                }
            }
        }
    }

    /// Column `u_col` (0-based).
    pub fn column(&self, col: usize) -> Result<Vec<C64>> {
        self.check_index(col)?;
        Ok((0..self.n).map(|row| self.entry(row, col)).collect())
    }

    /// Index `k` with `√N·u_i ∘ √N·u_j = √N·u_k` (0-based).
    pub fn product_index(&self, i: usize, j: usize) -> Result<usize> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(match self.kind {
            TransformKind::Fourier => (i + j) % self.n,
            TransformKind::Hadamard => i ^ j,
        })
    }

    /// `U·v`.
    pub fn forward(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v.len())?;
        let mut out = v.to_vec();
        self.apply_in_place(&mut out, Direction::Forward, &mut OpCount::default());
        self.scale_in_place(&mut out, &mut OpCount::default());
        Ok(out)
    }

    /// `Uᴴ·v`.
    pub fn adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v.len())?;
        let mut out = v.to_vec();
        self.apply_in_place(&mut out, Direction::Adjoint, &mut OpCount::default());
        self.scale_in_place(&mut out, &mut OpCount::default());
        Ok(out)
    }

    /// Unnormalized transform; the `1/√N` factor is left to the caller.
    pub(crate) fn apply_in_place(&self, buf: &mut [C64], dir: Direction, ops: &mut OpCount) {
        debug_assert_eq!(buf.len(), self.n);
        match self.kind {
            TransformKind::Hadamard => kernels::fwht(buf, ops),
            TransformKind::Fourier => {
                let inverse = dir == Direction::Adjoint;
                if self.has_fast_transform() {
                    kernels::fft_radix2(buf, &self.roots, inverse, ops);
                } else {
                    kernels::dft_dense(buf, &self.roots, inverse, ops);
                }
            }
        }
    }

    pub(crate) fn scale_in_place(&self, buf: &mut [C64], ops: &mut OpCount) {
        for x in buf.iter_mut() {
            *x *= self.scale;
        }
        ops.real_mul += 2 * buf.len() as u64;
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got });
        }
        Ok(())
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.n {
            return Err(Error::IndexOutOfRange { index, n: self.n });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::dense::DenseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn fourier_first_column_constant() {
        let u = StructuredUnitary::fourier(4).unwrap();
        let out = u.forward(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(max_diff(&out, &[c(0.5, 0.0); 4]) < 1e-15);
        let back = u.adjoint(&[c(0.5, 0.0); 4]).unwrap();
        assert!(max_diff(&back, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]) < 1e-15);
    }

    #[test]
    fn hadamard_two_point() {
        let u = StructuredUnitary::hadamard(2).unwrap();
        let out = u.forward(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(max_diff(&out, &[c(2f64.sqrt(), 0.0), c(0.0, 0.0)]) < 1e-15);
    }

    #[test]
    fn columns() {
        let h = StructuredUnitary::hadamard(4).unwrap();
        let f = StructuredUnitary::fourier(4).unwrap();
        let alt = [c(0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)];
        // 0-based column 1 is the second column
        assert!(max_diff(&h.column(1).unwrap(), &alt) < 1e-15);
        assert!(max_diff(&f.column(2).unwrap(), &alt) < 1e-15);
        for u in [&h, &f] {
            assert!(max_diff(&u.column(0).unwrap(), &[c(0.5, 0.0); 4]) < 1e-15);
        }
        assert_eq!(h.column(4), Err(Error::IndexOutOfRange { index: 4, n: 4 }));
    }

    #[test]
    fn forward_adjoint_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (kind, n) in [
            (TransformKind::Fourier, 8),
            (TransformKind::Fourier, 16),
            (TransformKind::Fourier, 12),
            (TransformKind::Hadamard, 32),
        ] {
            let u = StructuredUnitary::new(kind, n).unwrap();
            let d = DenseMatrix::from_unitary(&u);
            let v = random_vec(&mut rng, n);
            assert!(max_diff(&u.forward(&v).unwrap(), &d.mul_vec(&v)) < 1e-12);
            assert!(max_diff(&u.adjoint(&v).unwrap(), &d.adjoint().mul_vec(&v)) < 1e-12);
        }
    }

    #[test]
    fn hadamard_adjoint_equals_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for log_n in 0..=6 {
            let u = StructuredUnitary::hadamard(1 << log_n).unwrap();
            let v = random_vec(&mut rng, 1 << log_n);
            assert_eq!(u.forward(&v).unwrap(), u.adjoint(&v).unwrap());
        }
    }

    #[test]
    fn product_index_closed_forms() {
        let f = StructuredUnitary::fourier(8).unwrap();
        let h = StructuredUnitary::hadamard(8).unwrap();
        // 1-based: (3, 7) -> 1 for Fourier, (4, 6) -> 7 for Hadamard
        assert_eq!(f.product_index(2, 6).unwrap(), 0);
        assert_eq!(h.product_index(3, 5).unwrap(), 6);
        for j in 0..8 {
            assert_eq!(f.product_index(0, j).unwrap(), j);
            assert_eq!(h.product_index(0, j).unwrap(), j);
        }
    }

    #[test]
    fn pure_tone_has_flat_spectrum() {
        let u = StructuredUnitary::fourier(64).unwrap();
        let mut v = vec![c(0.0, 0.0); 64];
        v[1] = c(1.0, 0.0);
        for x in u.forward(&v).unwrap() {
            assert!((x.norm() - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn round_trip_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [TransformKind::Fourier, TransformKind::Hadamard] {
            let n = 1 << 16;
            let u = StructuredUnitary::new(kind, n).unwrap();
            let v = random_vec(&mut rng, n);
            let back = u.adjoint(&u.forward(&v).unwrap()).unwrap();
            let err: f64 = back.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            assert!(err <= 1e-10 * norm);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(StructuredUnitary::hadamard(12).is_err());
        assert!(StructuredUnitary::fourier(0).is_err());
        assert!(StructuredUnitary::fourier(12).is_ok());
        let u = StructuredUnitary::fourier(8).unwrap();
        assert_eq!(
            u.forward(&[c(0.0, 0.0); 4]),
            Err(Error::DimensionMismatch { expected: 8, got: 4 })
        );
    }
}
