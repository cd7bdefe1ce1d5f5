//! Greedy sparse recovery (OMP, CoSaMP) over partial Fourier and partial
//! Hadamard sensing matrices.
//!
//! The correlation step `h = Φᴴ r` that dominates every matching pursuit
//! iteration can be computed either with one fast transform per iteration
//! (conventional) or by subtracting scaled, permuted copies of a precomputed
//! correlation kernel from the initial correlation vector (fast). Both routes
//! produce the same correlation vector, so the solvers make the same
//! selections in either mode; only the arithmetic cost differs, and that cost
//! is tracked per iteration by [`cost_model`].
//!
//! Indices are 0-based throughout the Rust API. Text file formats and CLI
//! output use 1-based indices.

pub mod cli;
pub mod correlation;
pub mod cost_model;
mod error;
pub mod io;
pub mod parallel;
pub mod sensing;
pub mod solvers;
pub mod unitary;

pub use num_complex::Complex64 as C64;

pub use correlation::{CorrelationKernel, KernelPath, PermutationAction};
pub use cost_model::{CostReport, FlopConvention, IterationCost, OpCount};
pub use error::{Error, Result};
pub use sensing::{make_instance, make_row_selection, ProblemInstance, RowSelection, SelectionMode, SensingOperator};
pub use solvers::{
    cosamp_solve, omp_solve, CorrelationMode, LsMethod, RecoveryResult, SolveConfig, SolveError,
};

pub use unitary::{StructuredUnitary, TransformKind};
