//! Fast correlation updates through the correlation kernel.
//!
//! For `Φ = S_Ω U` with `U` from one of the two structured families,
//!
//! ```text
//! Φᴴ(y − Φ_Λ x) = h₀ − Σ_τ x(τ) · P_{Λ(τ)} c
//! ```
//!
//! where `h₀ = Φᴴy`, `c = Uᴴ S_Ωᵀ S_Ω U e₀` is the correlation kernel and
//! `P_λ = Uᴴ D_λ U` with `D_λ = √N·diag(u_λ)` is a permutation matrix. For the
//! Fourier family `P_λ` is a cyclic shift by `λ`; for Hadamard it is the index
//! map `k ↦ k ⊕ λ`. Neither is ever stored.

use std::collections::BTreeMap;
use std::fmt;

use crate::cost_model::OpCount;
use crate::sensing::SensingOperator;
use crate::unitary::dense::DenseMatrix;
use crate::unitary::{StructuredUnitary, TransformKind};
use crate::{Error, Result, C64};

/// Arithmetic used for each scaled kernel copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelPath {
    /// One complex multiplication per entry.
    Full,
    /// Fourier: products for mirrored entries share real multiplications via
    /// the conjugate symmetry of `c`. Hadamard: one product per distinct
    /// kernel value.
    #[default]
    Structured,
}

/// `P_λ` as an index map: `(P_λ v)[k] = v[source(k)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationAction {
    kind: TransformKind,
    lambda: usize,
    n: usize,
}

impl PermutationAction {
    pub fn new(kind: TransformKind, n: usize, lambda: usize) -> Result<Self> {
        if lambda >= n {
            return Err(Error::IndexOutOfRange { index: lambda, n });
        }
        if kind == TransformKind::Hadamard && !n.is_power_of_two() {
            return Err(Error::InvalidSize { n, reason: "Hadamard size must be a power of two" });
        }
        Ok(PermutationAction { kind, lambda, n })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    #[inline]
    pub fn source(&self, k: usize) -> usize {
        match self.kind {
            TransformKind::Fourier => (k + self.n - self.lambda) % self.n,
            TransformKind::Hadamard => k ^ self.lambda,
        }
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        Ok((0..self.n).map(|k| v[self.source(k)]).collect())
    }
}

/// Precomputed kernel `c = Φᴴ Φ e₀` for one row selection.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationKernel {
    kind: TransformKind,
    n: usize,
    m: usize,
    c: Vec<C64>,
    /// Distinct values of a Hadamard kernel and the value index of each entry.
    levels: Vec<f64>,
    level_of: Vec<u32>,
    precompute_ops: OpCount,
    precompute_scaling: OpCount,
}

/// The raw kernel as two transforms produce it, without symmetrization.
pub fn kernel_vector(op: &SensingOperator) -> Vec<C64> {
    let mut e0 = vec![C64::new(0.0, 0.0); op.n()];
    e0[0] = C64::new(1.0, 0.0);
    let col = op.apply(&e0).expect("length matches");
    op.apply_adjoint(&col).expect("length matches")
}

impl CorrelationKernel {
    /// Computes `c` with one forward and one adjoint application of `Φ`.
    ///
    /// Fourier kernels are projected onto exact conjugate symmetry and
    /// Hadamard kernels onto the lattice `ℤ/N`, both of which hold exactly
    /// in exact arithmetic.
    pub fn compute(op: &SensingOperator) -> Self {
        let n = op.n();
        let mut ops = OpCount::default();
        let mut scaling = OpCount::default();
        let mut work = vec![C64::new(0.0, 0.0); n];
        work[0] = C64::new(1.0, 0.0);
        let mut col = vec![C64::new(0.0, 0.0); op.m()];
        op.apply_counted(&mut work, &mut col, &mut ops, &mut scaling);
        let mut c = vec![C64::new(0.0, 0.0); n];
        op.apply_adjoint_counted(&col, &mut c, &mut ops, &mut scaling);

        let (mut levels, mut level_of) = (Vec::new(), Vec::new());
        match op.kind() {
            TransformKind::Fourier => symmetrize(&mut c),
            TransformKind::Hadamard => {
                let nf = n as f64;
                let mut index: BTreeMap<i64, u32> = BTreeMap::new();
                level_of.reserve(n);
                for x in c.iter_mut() {
                    let d = (x.re * nf).round() as i64;
                    debug_assert!((x.re * nf - d as f64).abs() < 1e-6 && (x.im * nf).abs() < 1e-6);
                    *x = C64::new(d as f64 / nf, 0.0);
                    let next = index.len() as u32;
                    let l = *index.entry(d).or_insert_with(|| {
                        levels.push(d as f64 / nf);
                        next
                    });
                    level_of.push(l);
                }
            }
        }
        CorrelationKernel {
            kind: op.kind(),
            n,
            m: op.m(),
            c,
            levels,
            level_of,
            precompute_ops: ops,
            precompute_scaling: scaling,
        }
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[C64] {
        &self.c
    }

    /// Number of distinct values of a Hadamard kernel (0 for Fourier).
    pub fn distinct_levels(&self) -> usize {
        self.levels.len()
    }

    /// Transform arithmetic spent computing the kernel.
    pub fn precompute_ops(&self) -> OpCount {
        self.precompute_ops
    }

    pub fn precompute_scaling_ops(&self) -> OpCount {
        self.precompute_scaling
    }

    pub fn action(&self, lambda: usize) -> Result<PermutationAction> {
        PermutationAction::new(self.kind, self.n, lambda)
    }

    /// `P_λ c`.
    pub fn shifted(&self, lambda: usize) -> Result<Vec<C64>> {
        self.action(lambda)?.apply(&self.c)
    }

    /// `h₀ − Σ_τ coeffs(τ)·P_{support(τ)} c`.
    pub fn fast_update(&self, h0: &[C64], support: &[usize], coeffs: &[C64]) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        let mut scratch = vec![C64::new(0.0, 0.0); self.n];
        self.fast_update_into(
            h0,
            support,
            coeffs,
            KernelPath::default(),
            &mut out,
            &mut scratch,
            &mut OpCount::default(),
        )?;
        Ok(out)
    }

    /// In-place form of [`fast_update`](Self::fast_update). `out` and
    /// `scratch` must have length N; arithmetic is tallied into `ops`.
    #[allow(clippy::too_many_arguments)]
    pub fn fast_update_into(
        &self,
        h0: &[C64],
        support: &[usize],
        coeffs: &[C64],
        path: KernelPath,
        out: &mut [C64],
        scratch: &mut [C64],
        ops: &mut OpCount,
    ) -> Result<()> {
        for len in [h0.len(), out.len(), scratch.len()] {
            if len != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: len });
            }
        }
        if support.len() != coeffs.len() {
            return Err(Error::DimensionMismatch { expected: support.len(), got: coeffs.len() });
        }
        check_support(support, self.n)?;

        out.copy_from_slice(h0);
        for (&lambda, &x) in support.iter().zip(coeffs) {
            match (self.kind, path) {
                (_, KernelPath::Full) => self.subtract_full(lambda, x, out, ops),
                (TransformKind::Fourier, KernelPath::Structured) => {
                    self.fourier_products(x, scratch, ops);
                    subtract_cyclic(out, scratch, lambda, ops);
                }
                (TransformKind::Hadamard, KernelPath::Structured) => {
                    self.subtract_hadamard_levels(lambda, x, out, scratch, ops)
                }
            }
        }
        Ok(())
    }

    fn subtract_full(&self, lambda: usize, x: C64, out: &mut [C64], ops: &mut OpCount) {
        let p = PermutationAction { kind: self.kind, lambda, n: self.n };
        for (k, o) in out.iter_mut().enumerate() {
            *o -= x * self.c[p.source(k)];
        }
        ops.complex_mul += self.n as u64;
        ops.complex_add += self.n as u64;
    }

    /// `products[j] = x·c[j]` using `c[N−j] = conj(c[j])`: per mirrored pair
    /// the four real products `ap, bq, aq, bp` give both results.
    fn fourier_products(&self, x: C64, products: &mut [C64], ops: &mut OpCount) {
        let n = self.n;
        let (a, b) = (x.re, x.im);
        products[0] = x * self.c[0].re;
        ops.real_mul += 2;
        let mut j = 1;
        while j < n - j {
            let (p, q) = (self.c[j].re, self.c[j].im);
            let (ap, bq, aq, bp) = (a * p, b * q, a * q, b * p);
            products[j] = C64::new(ap - bq, aq + bp);
            products[n - j] = C64::new(ap + bq, bp - aq);
            j += 1;
        }
        let pairs = (j - 1) as u64;
        ops.real_mul += 4 * pairs;
        ops.real_add += 4 * pairs;
        if n.is_multiple_of(2) && n > 1 {
            products[n / 2] = x * self.c[n / 2].re;
            ops.real_mul += 2;
        }
    }

    fn subtract_hadamard_levels(
        &self,
        lambda: usize,
        x: C64,
        out: &mut [C64],
        scratch: &mut [C64],
        ops: &mut OpCount,
    ) {
        let table = &mut scratch[..self.levels.len()];
        for (t, &v) in table.iter_mut().zip(&self.levels) {
            *t = x * v;
        }
        ops.real_mul += 2 * self.levels.len() as u64;
        for (k, o) in out.iter_mut().enumerate() {
            *o -= table[self.level_of[k ^ lambda] as usize];
        }
        ops.complex_add += self.n as u64;
    }
}

/// `out[k] -= products[(k − λ) mod N]`.
fn subtract_cyclic(out: &mut [C64], products: &[C64], lambda: usize, ops: &mut OpCount) {
    let n = out.len();
    let (head, tail) = out.split_at_mut(lambda);
    for (o, p) in tail.iter_mut().zip(&products[..n - lambda]) {
        *o -= p;
    }
    for (o, p) in head.iter_mut().zip(&products[n - lambda..]) {
        *o -= p;
    }
    ops.complex_add += n as u64;
}

fn symmetrize(c: &mut [C64]) {
    let n = c.len();
    c[0] = C64::new(c[0].re, 0.0);
    let mut j = 1;
    while j < n - j {
        let avg = (c[j] + c[n - j].conj()) * 0.5;
        c[j] = avg;
        c[n - j] = avg.conj();
        j += 1;
    }
    if n.is_multiple_of(2) && n > 1 {
        c[n / 2] = C64::new(c[n / 2].re, 0.0);
    }
}

fn check_support(support: &[usize], n: usize) -> Result<()> {
    if let Some(&bad) = support.iter().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateIndex(w[0]));
    }
    Ok(())
}

pub const PERMUTATION_TOL: f64 = 1e-10;

/// Why `Uᴴ D_λ U` failed to be a permutation matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum PermutationViolation {
    NotBinary { row: usize, col: usize, value: C64 },
    RowCount { row: usize, ones: usize },
    ColumnCount { col: usize, ones: usize },
}

impl fmt::Display for PermutationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PermutationViolation::NotBinary { row, col, value } => {
                write!(f, "entry ({}, {}) = {value} is neither 0 nor 1", row + 1, col + 1)
            }
            PermutationViolation::RowCount { row, ones } => {
                write!(f, "row {} has {ones} unit entries", row + 1)
            }
            PermutationViolation::ColumnCount { col, ones } => {
                write!(f, "column {} has {ones} unit entries", col + 1)
            }
        }
    }
}

impl std::error::Error for PermutationViolation {}

/// Materializes `Uᴴ D_λ U` for a dense `U` and extracts `σ` with
/// `P[i, σ(i)] = 1`.
pub fn extract_permutation(u: &DenseMatrix, lambda: usize) -> Result<Vec<usize>, PermutationViolation> {
    let n = u.size();
    let root_n = (n as f64).sqrt();
    let d: Vec<C64> = u.column(lambda).into_iter().map(|x| x * root_n).collect();
    let p = u.adjoint().mul(&DenseMatrix::diagonal(&d)).mul(u);

    let mut sigma = vec![usize::MAX; n];
    let mut col_ones = vec![0usize; n];
    for row in 0..n {
        let mut ones = 0;
        for col in 0..n {
            let value = p.get(row, col);
            if (value - 1.0).norm() <= PERMUTATION_TOL {
                ones += 1;
                col_ones[col] += 1;
                sigma[row] = col;
            } else if value.norm() > PERMUTATION_TOL {
                return Err(PermutationViolation::NotBinary { row, col, value });
            }
        }
        if ones != 1 {
            return Err(PermutationViolation::RowCount { row, ones });
        }
    }
    if let Some((col, &ones)) = col_ones.iter().enumerate().find(|(_, &c)| c != 1) {
        return Err(PermutationViolation::ColumnCount { col, ones });
    }
    Ok(sigma)
}

/// Checks that `Uᴴ D_λ U` is a permutation matrix and returns it as an
/// index map.
pub fn verify_permutation_property(
    u: &StructuredUnitary,
    lambda: usize,
) -> Result<Vec<usize>, PermutationViolation> {
    extract_permutation(&DenseMatrix::from_unitary(u), lambda)
}

/// Bit positions set in `λ`: `P_λ` is the composition of the single-bit XOR
/// generators `P_{2^b}`, so `log₂N` generators describe every `P_λ`.
pub fn hadamard_generators(lambda: usize, n: usize) -> Result<Vec<u32>> {
    if !n.is_power_of_two() {
        return Err(Error::InvalidSize { n, reason: "Hadamard size must be a power of two" });
    }
    if lambda >= n {
        return Err(Error::IndexOutOfRange { index: lambda, n });
    }
    Ok((0..n.trailing_zeros()).filter(|b| lambda >> b & 1 == 1).collect())
}

/// Applies generators one after another.
pub fn apply_hadamard_generators(generators: &[u32], v: &[C64]) -> Vec<C64> {
    generators.iter().fold(v.to_vec(), |acc, &b| {
        let mask = 1usize << b;
        (0..acc.len()).map(|k| acc[k ^ mask]).collect()
    })
}
