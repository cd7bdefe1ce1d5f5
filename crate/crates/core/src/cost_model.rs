//! Flop accounting for the correlation step.
//!
//! Analytic per-iteration costs follow the usual radix-2 conventions: one
//! complex multiplication is 6 flops, one complex addition 2 flops, an
//! `N`-point FFT costs `5 N log₂N` and an `N`-point Walsh–Hadamard transform
//! `N log₂N` complex additions. The fast update costs `6N` (Fourier) or `2N`
//! (Hadamard) per support atom.
//!
//! Measured counts are gathered in [`OpCount`] by the transforms and the
//! kernel update as they execute. Only the correlation step is compared with
//! the analytic model; normalization, least-squares and identification work is
//! tallied separately in [`IterationCost`].

use std::fmt;
use std::io::Write;
use std::ops::{Add, AddAssign};

use crate::unitary::TransformKind;

/// Flop weights for complex arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopConvention {
    pub complex_mult_flops: u64,
    pub complex_add_flops: u64,
}

impl FlopConvention {
    pub const STANDARD: FlopConvention = FlopConvention {
        complex_mult_flops: 6,
        complex_add_flops: 2,
    };
}

impl Default for FlopConvention {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Tally of executed arithmetic operations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub complex_mul: u64,
    pub complex_add: u64,
    pub real_mul: u64,
    pub real_add: u64,
}

impl OpCount {
    pub fn flops(&self) -> u64 {
        let conv = FlopConvention::STANDARD;
        self.complex_mul * conv.complex_mult_flops
            + self.complex_add * conv.complex_add_flops
            + self.real_mul
            + self.real_add
    }

    pub fn is_zero(&self) -> bool {
        *self == OpCount::default()
    }
}

impl Add for OpCount {
    type Output = OpCount;
    fn add(self, rhs: OpCount) -> OpCount {
        OpCount {
            complex_mul: self.complex_mul + rhs.complex_mul,
            complex_add: self.complex_add + rhs.complex_add,
            real_mul: self.real_mul + rhs.real_mul,
            real_add: self.real_add + rhs.real_add,
        }
    }
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, rhs: OpCount) {
        *self = *self + rhs;
    }
}

/// `Some(log₂ n)` when `n` is a power of two.
pub fn log2_exact(n: usize) -> Option<u32> {
    (n.is_power_of_two()).then(|| n.trailing_zeros())
}

/// Flops for one dense `N × N` complex matrix-vector product.
pub fn dense_transform_flops(n: usize) -> u64 {
    let n = n as u64;
    6 * n * n + 2 * n * n.saturating_sub(1)
}

/// Cost of one conventional correlation step (one full transform).
///
/// Non-power-of-two sizes only exist for Fourier and use the dense path.
pub fn conventional_iteration_flops(kind: TransformKind, n: usize) -> u64 {
    match log2_exact(n) {
        Some(log_n) => {
            let per = match kind {
                TransformKind::Fourier => 5,
                TransformKind::Hadamard => 2,
            };
            per * n as u64 * u64::from(log_n)
        }
        None => dense_transform_flops(n),
    }
}

/// Cost of subtracting one scaled, permuted kernel copy.
pub fn fast_flops_per_atom(kind: TransformKind, n: usize) -> u64 {
    match kind {
        TransformKind::Fourier => 6 * n as u64,
        TransformKind::Hadamard => 2 * n as u64,
    }
}

/// Fast-mode OMP cost at iteration `t` (1-based).
///
/// # Panics
/// If `t == 0`.
pub fn fast_iteration_flops(kind: TransformKind, n: usize, t: usize) -> u64 {
    assert!(t >= 1, "iterations are numbered from 1");
    if t == 1 {
        conventional_iteration_flops(kind, n)
    } else {
        fast_flops_per_atom(kind, n) * (t as u64 - 1)
    }
}

/// Fast-mode cost of a correlation step whose support holds `atoms` entries.
/// The first iteration is always one transform.
pub fn fast_correlation_flops(kind: TransformKind, n: usize, first: bool, atoms: usize) -> u64 {
    if first {
        conventional_iteration_flops(kind, n)
    } else {
        fast_flops_per_atom(kind, n) * atoms as u64
    }
}

/// Largest `t` for which the fast OMP update is no more expensive than one
/// transform. Adaptive OMP runs fast for `t ≤ t*` and conventional after.
pub fn crossover_iteration(kind: TransformKind, n: usize) -> usize {
    let conventional = conventional_iteration_flops(kind, n);
    let per_atom = fast_flops_per_atom(kind, n);
    (conventional / per_atom) as usize + 1
}

/// Fast-to-conventional OMP cost ratio at iteration `t`.
pub fn omp_relative_cost(kind: TransformKind, n: usize, t: usize) -> f64 {
    fast_iteration_flops(kind, n, t) as f64 / conventional_iteration_flops(kind, n) as f64
}

/// Fast-to-conventional CoSaMP cost ratio at iteration `t` with sparsity `k`.
pub fn cosamp_relative_cost_at(kind: TransformKind, n: usize, k: usize, t: usize) -> f64 {
    assert!(t >= 1, "iterations are numbered from 1");
    fast_correlation_flops(kind, n, t == 1, k) as f64
        / conventional_iteration_flops(kind, n) as f64
}

/// Steady-state (`t > 1`) CoSaMP ratio for partial Fourier sensing:
/// `6K / (5 log₂N)`.
pub fn cosamp_relative_cost(n: usize, k: usize) -> f64 {
    cosamp_relative_cost_at(TransformKind::Fourier, n, k, 2)
}

/// Which computation produced a correlation vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelationPath {
    Conventional,
    Fast,
}

impl fmt::Display for CorrelationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationPath::Conventional => "conventional",
            CorrelationPath::Fast => "fast",
        })
    }
}

/// Costs recorded for one solver iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationCost {
    pub t: usize,
    pub path: CorrelationPath,
    /// Analytic correlation cost of the path that ran.
    pub analytic_flops: u64,
    /// Analytic cost of the conventional path at this iteration.
    pub conventional_flops: u64,
    /// Correlation arithmetic actually executed.
    pub counted: OpCount,
    /// `1/√N` normalization of transform inputs and outputs.
    pub scaling: OpCount,
    pub least_squares: OpCount,
    pub identification: OpCount,
}

impl IterationCost {
    pub fn counted_flops(&self) -> u64 {
        self.counted.flops()
    }

    pub fn relative_vs_conventional(&self) -> f64 {
        self.analytic_flops as f64 / self.conventional_flops as f64
    }
}

/// Per-iteration cost rows for one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub kind: TransformKind,
    pub n: usize,
    /// Set when the transform ran through the dense `O(N²)` path.
    pub dense_fallback: bool,
    /// One-time kernel computation, when a fast path needed it.
    pub kernel_precompute: Option<OpCount>,
    pub rows: Vec<IterationCost>,
}

impl CostReport {
    pub fn new(kind: TransformKind, n: usize) -> Self {
        CostReport {
            kind,
            n,
            dense_fallback: log2_exact(n).is_none(),
            kernel_precompute: None,
            rows: Vec::new(),
        }
    }

    pub fn total_counted_flops(&self) -> u64 {
        self.rows.iter().map(IterationCost::counted_flops).sum()
    }

    pub fn total_analytic_flops(&self) -> u64 {
        self.rows.iter().map(|r| r.analytic_flops).sum()
    }

    pub const CSV_HEADER: &'static str = "t,mode,analytic_flops,counted_flops,relative_vs_conventional";

    /// Writes `t,mode,analytic_flops,counted_flops,relative_vs_conventional`.
    ///
    /// Kernel precomputation, when present, is the `t = 0` row with mode
    /// `kernel`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        let conventional = conventional_iteration_flops(self.kind, self.n);
        if let Some(kernel) = self.kernel_precompute {
            let analytic = 2 * conventional;
            writeln!(
                w,
                "0,kernel,{},{},{}",
                analytic,
                kernel.flops(),
                analytic as f64 / conventional as f64
            )?;
        }
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                row.t,
                row.path,
                row.analytic_flops,
                row.counted_flops(),
                row.relative_vs_conventional()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TransformKind::*;

    #[test]
    fn table_formulas() {
        assert_eq!(conventional_iteration_flops(Fourier, 4096), 245_760);
        assert_eq!(conventional_iteration_flops(Hadamard, 1024), 20_480);
        assert_eq!(conventional_iteration_flops(Fourier, 2), 10);
        assert_eq!(fast_iteration_flops(Fourier, 4096, 11), 245_760);
        assert_eq!(fast_iteration_flops(Hadamard, 1024, 3), 4096);
        assert_eq!(omp_relative_cost(Hadamard, 1024, 3), 0.2);
        for kind in [Fourier, Hadamard] {
            assert_eq!(
                fast_iteration_flops(kind, 256, 1),
                conventional_iteration_flops(kind, 256)
            );
        }
    }

    #[test]
    fn crossover_closed_forms() {
        assert_eq!(crossover_iteration(Fourier, 4096), 11);
        assert_eq!(crossover_iteration(Hadamard, 1024), 11);
        assert_eq!(crossover_iteration(Fourier, 2), 1);
        for log_n in 1..=20u32 {
            let n = 1usize << log_n;
            assert_eq!(
                crossover_iteration(Fourier, n),
                (5 * log_n as usize) / 6 + 1,
                "N = {n}"
            );
            assert_eq!(crossover_iteration(Hadamard, n), log_n as usize + 1);
        }
    }

    #[test]
    fn crossover_is_largest_cheaper_iteration() {
        for kind in [Fourier, Hadamard] {
            for n in [2usize, 8, 64, 1000, 4096] {
                let conv = conventional_iteration_flops(kind, n);
                let t_star = crossover_iteration(kind, n);
                assert!(fast_iteration_flops(kind, n, t_star) <= conv);
                assert!(fast_iteration_flops(kind, n, t_star + 1) > conv);
            }
        }
    }

    #[test]
    fn cosamp_ratio() {
        assert_eq!(cosamp_relative_cost(8192, 4), 24.0 / 65.0);
        assert_eq!(cosamp_relative_cost(8192, 0), 0.0);
        assert!((cosamp_relative_cost(1024, 10) - 1.2).abs() < 1e-15);
        assert_eq!(cosamp_relative_cost_at(Fourier, 8192, 4, 1), 1.0);
    }

    #[test]
    fn dense_fallback_cost() {
        assert_eq!(conventional_iteration_flops(Fourier, 3), 6 * 9 + 2 * 3 * 2);
        assert!(CostReport::new(Fourier, 12).dense_fallback);
        assert!(!CostReport::new(Fourier, 16).dense_fallback);
    }

    #[test]
    fn op_count_flops() {
        let c = OpCount {
            complex_mul: 1,
            complex_add: 2,
            real_mul: 3,
            real_add: 4,
        };
        assert_eq!(c.flops(), 6 + 4 + 3 + 4);
        assert_eq!((c + c).flops(), 2 * c.flops());
    }

    #[test]
    fn csv_rows() {
        let mut report = CostReport::new(Hadamard, 64);
        report.kernel_precompute = Some(OpCount {
            complex_add: 768,
            ..Default::default()
        });
        report.rows.push(IterationCost {
            t: 1,
            path: CorrelationPath::Fast,
            analytic_flops: 768,
            conventional_flops: 768,
            counted: OpCount {
                complex_add: 384,
                ..Default::default()
            },
            scaling: OpCount::default(),
            least_squares: OpCount::default(),
            identification: OpCount::default(),
        });
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "t,mode,analytic_flops,counted_flops,relative_vs_conventional\n\
             0,kernel,1536,1536,2\n\
             1,fast,768,768,1\n"
        );
    }
}
