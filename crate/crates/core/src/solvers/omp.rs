use crate::correlation::CorrelationKernel;
use crate::cost_model::{CostReport, OpCount};
use crate::sensing::SensingOperator;
use crate::solvers::correlator::Correlator;
use crate::solvers::lstsq::GrowingLs;
use crate::solvers::select::{argmax, squared_magnitudes};
use crate::solvers::{check_inputs, norm, residual, scatter, RecoveryResult, SolveConfig, SolveError, Termination};
use crate::C64;

/// Orthogonal matching pursuit.
///
/// Each iteration correlates the residual with every column, adds the
/// best-matching column to the support, refits by least squares and updates
/// the residual. Halts after `max_iterations` iterations or once
/// `‖r‖ ≤ residual_tolerance·‖y‖`.
pub fn omp_solve(op: &SensingOperator, y: &[C64], cfg: &SolveConfig) -> Result<RecoveryResult, SolveError> {
    omp_run(op, y, cfg, None)
}

/// As [`omp_solve`], reusing a kernel computed for `op`.
pub fn omp_solve_with_kernel(
    op: &SensingOperator,
    kernel: &CorrelationKernel,
    y: &[C64],
    cfg: &SolveConfig,
) -> Result<RecoveryResult, SolveError> {
    omp_run(op, y, cfg, Some(kernel))
}

fn omp_run(
    op: &SensingOperator,
    y: &[C64],
    cfg: &SolveConfig,
    kernel: Option<&CorrelationKernel>,
) -> Result<RecoveryResult, SolveError> {
    check_inputs(op, y, cfg, kernel)?;
    let n = op.n();
    let m = op.m();
    let tolerance = cfg.residual_tolerance * norm(y);

    let mut correlator = Correlator::new(op, cfg.correlation_mode, cfg.kernel_path, kernel);
    let mut ls = GrowingLs::new(cfg.ls_method);
    let mut costs = CostReport::new(op.kind(), n);
    let mut support: Vec<usize> = Vec::new();
    let mut coeffs: Vec<C64> = Vec::new();
    let mut selected = vec![false; n];
    let mut r = y.to_vec();
    let mut h = vec![C64::new(0.0, 0.0); n];
    let mut selections = Vec::new();
    let mut correlations = Vec::new();

    let finish = |support: Vec<usize>,
                  coeffs: Vec<C64>,
                  r: &[C64],
                  mut costs: CostReport,
                  selections,
                  correlations,
                  kernel_precompute,
                  termination| {
        costs.kernel_precompute = kernel_precompute;
        RecoveryResult {
            x_hat: scatter(n, &support, &coeffs),
            iterations_run: support.len(),
            residual_norm: norm(r),
            support,
            coefficients: coeffs,
            costs,
            selections,
            correlations,
            termination,
        }
    };

    let mut t = 1;
    let termination = loop {
        if norm(&r) <= tolerance {
            break Termination::ResidualTolerance;
        }
        if t > cfg.max_iterations {
            break Termination::MaxIterations;
        }
        if support.len() == n {
            break Termination::Exhausted;
        }

        let mut cost = correlator.correlate(t, &r, &support, &coeffs, &mut h);
        if cfg.record_correlations {
            correlations.push(h.clone());
        }

        let mags = squared_magnitudes(&h, &mut cost.identification);
        let lambda = argmax(&mags, &selected).expect("an unselected column remains");

        let mut ls_ops = OpCount::default();
        let Some(x) = ls.push_and_solve(op.column_unchecked(lambda), y, &mut ls_ops) else {
            let kernel_precompute = correlator.kernel_precompute();
            let partial = finish(support, coeffs, &r, costs, selections, correlations, kernel_precompute, Termination::RankDeficient);
            return Err(SolveError::RankDeficient { column: lambda, partial: Box::new(partial) });
        };
        support.push(lambda);
        selected[lambda] = true;
        coeffs = x;
        r = residual(op, y, &support, &coeffs);
        ls_ops.complex_mul += (m * support.len()) as u64;
        ls_ops.complex_add += (m * support.len()) as u64;
        cost.least_squares = ls_ops;

        costs.rows.push(cost);
        selections.push(vec![lambda]);
        t += 1;
    };

    let kernel_precompute = correlator.kernel_precompute();
    Ok(finish(support, coeffs, &r, costs, selections, correlations, kernel_precompute, termination))
}
