//! Matching pursuit solvers.
//!
//! Both solvers share one correlation engine, so switching between the
//! conventional and fast correlation routes changes only how `Φᴴr` is
//! computed: identification, least squares and residual updates run the same
//! code in every mode.

mod correlator;
mod cosamp;
mod lstsq;
mod omp;
mod select;

use std::fmt;
use std::str::FromStr;

use thiserror::Error as ThisError;

use crate::correlation::{CorrelationKernel, KernelPath};
use crate::cost_model::CostReport;
use crate::sensing::SensingOperator;
use crate::{Error, C64};

pub use cosamp::{cosamp_solve, cosamp_solve_with_kernel};
pub use lstsq::{least_squares, LsMethod, RankDeficient, PIVOT_TOL, RANK_TOL};
pub use omp::{omp_solve, omp_solve_with_kernel};
pub use select::TIE_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelationMode {
    /// One adjoint transform of the residual per iteration.
    Conventional,
    /// Kernel update from the cached initial correlation after iteration 1.
    Fast,
    /// Fast while its analytic cost does not exceed one transform.
    Adaptive,
}

impl fmt::Display for CorrelationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMode::Conventional => "conventional",
            CorrelationMode::Fast => "fast",
            CorrelationMode::Adaptive => "adaptive",
        })
    }
}

impl FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "conventional" | "conv" => Ok(CorrelationMode::Conventional),
            "fast" => Ok(CorrelationMode::Fast),
            "adaptive" => Ok(CorrelationMode::Adaptive),
            other => Err(Error::InvalidParameter(format!("unknown correlation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub max_iterations: usize,
    /// Halt once `‖r‖ ≤ residual_tolerance · ‖y‖`.
    pub residual_tolerance: f64,
    pub correlation_mode: CorrelationMode,
    pub ls_method: LsMethod,
    pub kernel_path: KernelPath,
    /// Keep every correlation vector in [`RecoveryResult::correlations`].
    pub record_correlations: bool,
}

impl SolveConfig {
    pub const DEFAULT_RESIDUAL_TOLERANCE: f64 = 1e-9;

    /// OMP defaults: at most `k` iterations.
    pub fn omp(k: usize, mode: CorrelationMode) -> Self {
        SolveConfig {
            max_iterations: k.max(1),
            residual_tolerance: Self::DEFAULT_RESIDUAL_TOLERANCE,
            correlation_mode: mode,
            ls_method: LsMethod::default(),
            kernel_path: KernelPath::default(),
            record_correlations: false,
        }
    }

    /// CoSaMP defaults: at most `2k` iterations.
    pub fn cosamp(k: usize, mode: CorrelationMode) -> Self {
        SolveConfig { max_iterations: (2 * k).max(1), ..Self::omp(k, mode) }
    }

    pub fn with_recording(mut self) -> Self {
        self.record_correlations = true;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.residual_tolerance >= 0.0 && self.residual_tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "residual tolerance {} must be finite and ≥ 0",
                self.residual_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxIterations,
    ResidualTolerance,
    /// Every column has been selected.
    Exhausted,
    /// Carried by the partial result of [`SolveError::RankDeficient`].
    RankDeficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub x_hat: Vec<C64>,
    /// OMP: selection order. CoSaMP: ascending.
    pub support: Vec<usize>,
    /// Aligned with `support`.
    pub coefficients: Vec<C64>,
    pub iterations_run: usize,
    pub residual_norm: f64,
    pub costs: CostReport,
    /// Per iteration: the index OMP added, or the support CoSaMP kept.
    pub selections: Vec<Vec<usize>>,
    /// Per-iteration correlation vectors, when recorded.
    pub correlations: Vec<Vec<C64>>,
    pub termination: Termination,
}

impl RecoveryResult {
    pub fn sorted_support(&self) -> Vec<usize> {
        let mut s = self.support.clone();
        s.sort_unstable();
        s
    }
}

#[derive(Debug, Clone, PartialEq, ThisError)]
pub enum SolveError {
    #[error(transparent)]
    Invalid(#[from] Error),
    /// Column `column` was numerically dependent on the selected ones; the
    /// partial result holds the estimate from before it was chosen.
    #[error("column {column} is numerically dependent on the current support")]
    RankDeficient { column: usize, partial: Box<RecoveryResult> },
}

impl SolveError {
    pub fn partial(&self) -> Option<&RecoveryResult> {
        match self {
            SolveError::RankDeficient { partial, .. } => Some(partial),
            SolveError::Invalid(_) => None,
        }
    }
}

fn check_inputs(
    op: &SensingOperator,
    y: &[C64],
    cfg: &SolveConfig,
    kernel: Option<&CorrelationKernel>,
) -> Result<(), Error> {
    cfg.validate()?;
    if y.len() != op.m() {
        return Err(Error::DimensionMismatch { expected: op.m(), got: y.len() });
    }
    if let Some(k) = kernel {
        if k.kind() != op.kind() || k.n() != op.n() || k.m() != op.m() {
            return Err(Error::InvalidParameter("kernel was computed for a different operator".into()));
        }
    }
    Ok(())
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y − Φ_Λ x`.
fn residual(op: &SensingOperator, y: &[C64], support: &[usize], coeffs: &[C64]) -> Vec<C64> {
    let fit = op.apply_sparse(support, coeffs).expect("support is valid");
    y.iter().zip(&fit).map(|(a, b)| a - b).collect()
}

fn scatter(n: usize, support: &[usize], coeffs: &[C64]) -> Vec<C64> {
    let mut x = vec![C64::new(0.0, 0.0); n];
    for (&j, &c) in support.iter().zip(coeffs) {
        x[j] = c;
    }
    x
}
