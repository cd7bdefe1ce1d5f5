use crate::correlation::CorrelationKernel;
use crate::cost_model::{CostReport, OpCount};
use crate::sensing::SensingOperator;
use crate::solvers::correlator::Correlator;
use crate::solvers::lstsq::solve_dropping;
use crate::solvers::select::{select_largest, squared_magnitudes};
use crate::solvers::{check_inputs, norm, residual, scatter, RecoveryResult, SolveConfig, SolveError, Termination};
use crate::C64;

/// Compressive sampling matching pursuit with sparsity `k`.
///
/// Each iteration forms the proxy `Φᴴr`, merges its `2k` largest entries
/// with the current support, solves least squares on the merged set, keeps
/// the `k` largest coefficients and recomputes the residual. In fast mode the
/// proxy costs `k` kernel subtractions at every iteration after the first.
///
/// Merged sets may exceed the number of measurements; numerically dependent
/// columns then receive a zero coefficient instead of failing the solve.
pub fn cosamp_solve(
    op: &SensingOperator,
    y: &[C64],
    k: usize,
    cfg: &SolveConfig,
) -> Result<RecoveryResult, SolveError> {
    cosamp_run(op, y, k, cfg, None)
}

pub fn cosamp_solve_with_kernel(
    op: &SensingOperator,
    kernel: &CorrelationKernel,
    y: &[C64],
    k: usize,
    cfg: &SolveConfig,
) -> Result<RecoveryResult, SolveError> {
    cosamp_run(op, y, k, cfg, Some(kernel))
}

fn cosamp_run(
    op: &SensingOperator,
    y: &[C64],
    k: usize,
    cfg: &SolveConfig,
    kernel: Option<&CorrelationKernel>,
) -> Result<RecoveryResult, SolveError> {
    check_inputs(op, y, cfg, kernel)?;
    let n = op.n();
    let m = op.m();
    let tolerance = cfg.residual_tolerance * norm(y);

    let mut correlator = Correlator::new(op, cfg.correlation_mode, cfg.kernel_path, kernel);
    let mut costs = CostReport::new(op.kind(), n);
    let mut support: Vec<usize> = Vec::new();
    let mut coeffs: Vec<C64> = Vec::new();
    let mut r = y.to_vec();
    let mut proxy = vec![C64::new(0.0, 0.0); n];
    let mut selections = Vec::new();
    let mut correlations = Vec::new();

    let mut t = 1;
    let termination = loop {
        if norm(&r) <= tolerance {
            break Termination::ResidualTolerance;
        }
        if t > cfg.max_iterations {
            break Termination::MaxIterations;
        }

        let mut cost = correlator.correlate(t, &r, &support, &coeffs, &mut proxy);
        if cfg.record_correlations {
            correlations.push(proxy.clone());
        }

        let mags = squared_magnitudes(&proxy, &mut cost.identification);
        let mut merged = select_largest(&mags, 2 * k);
        merged.extend_from_slice(&support);
        merged.sort_unstable();
        merged.dedup();

        let mut ls_ops = OpCount::default();
        let (b, _dropped) = solve_dropping(op, &merged, y, cfg.ls_method, &mut ls_ops);
        let b_mags: Vec<f64> = b.iter().map(|x| x.norm_sqr()).collect();
        let keep = select_largest(&b_mags, k);
        support = keep.iter().map(|&p| merged[p]).collect();
        coeffs = keep.iter().map(|&p| b[p]).collect();

        r = residual(op, y, &support, &coeffs);
        ls_ops.complex_mul += (m * support.len()) as u64;
        ls_ops.complex_add += (m * support.len()) as u64;
        cost.least_squares = ls_ops;

        costs.rows.push(cost);
        selections.push(support.clone());
        t += 1;
    };

    costs.kernel_precompute = correlator.kernel_precompute();
    Ok(RecoveryResult {
        x_hat: scatter(n, &support, &coeffs),
        iterations_run: t - 1,
        residual_norm: norm(&r),
        support,
        coefficients: coeffs,
        costs,
        selections,
        correlations,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_model::{fast_flops_per_atom, CorrelationPath};
    use crate::sensing::make_instance;
    use crate::solvers::CorrelationMode;
    use crate::unitary::TransformKind;

    #[test]
    fn zero_measurement() {
        let op = SensingOperator::random(TransformKind::Hadamard, 64, 16, 1).unwrap();
        let y = vec![C64::new(0.0, 0.0); 16];
        let res = cosamp_solve(&op, &y, 3, &SolveConfig::cosamp(3, CorrelationMode::Fast)).unwrap();
        assert!(res.support.is_empty());
        assert!(res.x_hat.iter().all(|x| *x == C64::new(0.0, 0.0)));
    }

    #[test]
    fn modes_agree_per_iteration() {
        for kind in [TransformKind::Fourier, TransformKind::Hadamard] {
            for seed in 0..10 {
                let op = SensingOperator::random(kind, 256, 64, seed).unwrap();
                let inst = make_instance(&op, 4, 0.0, seed + 100).unwrap();
                let run = |mode| cosamp_solve(&op, &inst.y, 4, &SolveConfig::cosamp(4, mode)).unwrap();
                let conv = run(CorrelationMode::Conventional);
                let fast = run(CorrelationMode::Fast);
                assert_eq!(conv.selections, fast.selections);
                assert!(fast.selections.iter().all(|s| s.len() <= 4));
            }
        }
    }

    #[test]
    fn fast_cost_is_constant_after_first_iteration() {
        let op = SensingOperator::random(TransformKind::Fourier, 1024, 64, 2).unwrap();
        let inst = make_instance(&op, 4, 0.01, 3).unwrap();
        let mut cfg = SolveConfig::cosamp(4, CorrelationMode::Fast);
        cfg.residual_tolerance = 0.0;
        let res = cosamp_solve(&op, &inst.y, 4, &cfg).unwrap();
        assert_eq!(res.iterations_run, 8);
        for row in &res.costs.rows[1..] {
            assert_eq!(row.path, CorrelationPath::Fast);
            assert_eq!(row.analytic_flops, 4 * fast_flops_per_atom(TransformKind::Fourier, 1024));
            assert_eq!(row.analytic_flops, 6 * 1024 * 4);
        }
    }

    #[test]
    fn oversized_merge_does_not_fail() {
        // 3K > M: merged sets are wider than the measurement count
        let op = SensingOperator::random(TransformKind::Hadamard, 256, 16, 8).unwrap();
        let inst = make_instance(&op, 8, 0.0, 9).unwrap();
        let res = cosamp_solve(&op, &inst.y, 8, &SolveConfig::cosamp(8, CorrelationMode::Fast)).unwrap();
        assert!(res.support.len() <= 8);
    }
}
