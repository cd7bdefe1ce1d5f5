use std::io::Write;

use crate::parallel::map_trials;
use crate::sensing::{derive_seed, make_instance, SensingOperator};
use crate::solvers::{CorrelationMode, RecoveryResult, SolveError};
use crate::unitary::TransformKind;
use crate::C64;

use super::{open_out, CliError, CliResult, ExperimentConfig, Solver};

/// Largest accepted relative gap `‖h_fast − h_conv‖ / ‖h_conv‖`.
pub const EQUIV_TOL: f64 = 1e-10;

pub const EQUIV_CSV_HEADER: &str =
    "kind,N,M,K,trial,seed,iterations,mismatch,max_rel_deviation,exact_conventional,exact_fast";

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub kind: TransformKind,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    pub iterations: usize,
    /// Selection sequences (or stopping reasons) differ between modes.
    pub mismatch: bool,
    /// Worst per-iteration relative correlation gap.
    pub max_deviation: f64,
    pub exact_conventional: bool,
    pub exact_fast: bool,
}

fn run_recorded(
    solver: Solver,
    op: &SensingOperator,
    y: &[C64],
    k: usize,
    mode: CorrelationMode,
) -> CliResult<(RecoveryResult, Option<usize>)> {
    let cfg = solver.config(k, mode).with_recording();
    match solver.run(op, y, k, &cfg) {
        Ok(r) => Ok((r, None)),
        Err(SolveError::RankDeficient { column, partial }) => Ok((*partial, Some(column))),
        Err(SolveError::Invalid(e)) => Err(e.into()),
    }
}

fn rel_gap(fast: &[C64], conv: &[C64]) -> f64 {
    let diff = fast.iter().zip(conv).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let scale = conv.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Solves one seeded instance in conventional and fast mode and
/// compares the runs.
pub fn equivalence_trial(
    solver: Solver,
    kind: TransformKind,
    n: usize,
    m: usize,
    k: usize,
    noise_stddev: f64,
    seed: u64,
) -> CliResult<TrialOutcome> {
    let op = SensingOperator::random(kind, n, m, derive_seed(seed, 0))?;
    let inst = make_instance(&op, k, noise_stddev, derive_seed(seed, 1))?;
    let (conv, conv_stop) = run_recorded(solver, &op, &inst.y, k, CorrelationMode::Conventional)?;
    let (fast, fast_stop) = run_recorded(solver, &op, &inst.y, k, CorrelationMode::Fast)?;

    let mismatch = conv.selections != fast.selections
        || conv.termination != fast.termination
        || conv_stop != fast_stop
        || conv.correlations.len() != fast.correlations.len();
    let max_deviation = conv
        .correlations
        .iter()
        .zip(&fast.correlations)
        .map(|(c, f)| rel_gap(f, c))
        .fold(0.0, f64::max);
    let truth = inst.support();
    Ok(TrialOutcome {
        kind,
        n,
        m,
        k,
        trial: 0,
        seed,
        iterations: conv.iterations_run,
        mismatch,
        max_deviation,
        exact_conventional: conv.sorted_support() == truth,
        exact_fast: fast.sorted_support() == truth,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivSummary {
    pub trials: usize,
    pub mismatches: usize,
    /// Trials whose correlation gap exceeded [`EQUIV_TOL`].
    pub deviation_failures: usize,
    pub mean_deviation: f64,
    pub max_deviation: f64,
    pub exact_conventional: usize,
    pub exact_fast: usize,
    pub outcomes: Vec<TrialOutcome>,
}

impl EquivSummary {
    pub fn from_outcomes(outcomes: Vec<TrialOutcome>) -> Self {
        let trials = outcomes.len();
        let sum: f64 = outcomes.iter().map(|o| o.max_deviation).sum();
        EquivSummary {
            trials,
            mismatches: outcomes.iter().filter(|o| o.mismatch).count(),
            deviation_failures: outcomes.iter().filter(|o| o.max_deviation.is_nan() || o.max_deviation > EQUIV_TOL).count(),
            mean_deviation: if trials == 0 { 0.0 } else { sum / trials as f64 },
            max_deviation: outcomes.iter().map(|o| o.max_deviation).fold(0.0, f64::max),
            exact_conventional: outcomes.iter().filter(|o| o.exact_conventional).count(),
            exact_fast: outcomes.iter().filter(|o| o.exact_fast).count(),
            outcomes,
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.deviation_failures == 0
    }
}

/// Runs `trials` seeded trials for every `(kind, N, M, K)` in the grid,
/// spread over threads when enabled; outcomes are in grid-then-trial order.
pub fn run_campaign(cfg: &ExperimentConfig) -> CliResult<EquivSummary> {
    cfg.validate()?;
    let cells = cfg.grid()?;
    let total = cells.len() * cfg.trials;
    let results = map_trials(total, cfg.execution, |i| {
        let (kind, n, m, k) = cells[i / cfg.trials.max(1)];
        let seed = derive_seed(cfg.seed, i as u64);
        equivalence_trial(cfg.solver, kind, n, m, k, cfg.noise_stddev, seed).map(|mut o| {
            o.trial = i % cfg.trials;
            o
        })
    });
    let outcomes = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    Ok(EquivSummary::from_outcomes(outcomes))
}

/// Monte Carlo fast-versus-conventional campaign. Writes per-trial rows to
/// `cfg.out` when set; fails on any mismatch or out-of-tolerance deviation.
pub fn cmd_equiv(cfg: &ExperimentConfig, sink: &mut dyn Write) -> CliResult<EquivSummary> {
    let summary = run_campaign(cfg)?;
    if let Some(path) = &cfg.out {
        let mut f = open_out(path)?;
        writeln!(f, "{EQUIV_CSV_HEADER}")?;
        for o in &summary.outcomes {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{:e},{},{}",
                o.kind,
                o.n,
                o.m,
                o.k,
                o.trial + 1,
                o.seed,
                o.iterations,
                u8::from(o.mismatch),
                o.max_deviation,
                u8::from(o.exact_conventional),
                u8::from(o.exact_fast)
            )?;
        }
        f.flush()?;
    }
    writeln!(sink, "solver: {}", cfg.solver)?;
    writeln!(sink, "trials: {}", summary.trials)?;
    writeln!(sink, "mismatches: {}", summary.mismatches)?;
    writeln!(sink, "deviation above {EQUIV_TOL:e}: {}", summary.deviation_failures)?;
    writeln!(sink, "mean correlation deviation: {:.3e}", summary.mean_deviation)?;
    writeln!(sink, "max correlation deviation: {:.3e}", summary.max_deviation)?;
    writeln!(
        sink,
        "exact recovery: conventional {}/{}, fast {}/{}",
        summary.exact_conventional, summary.trials, summary.exact_fast, summary.trials
    )?;
    if !summary.passed() {
        return Err(CliError::Failure(format!(
            "equivalence failed: {} mismatches, {} deviations above tolerance",
            summary.mismatches, summary.deviation_failures
        )));
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_campaign_is_clean_and_deterministic() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("kind", "fourier,hadamard").unwrap();
        cfg.set("n", "64").unwrap();
        cfg.set("m", "16").unwrap();
        cfg.set("k", "0,3").unwrap();
        cfg.set("trials", "5").unwrap();
        let a = run_campaign(&cfg).unwrap();
        assert_eq!(a.trials, 20);
        assert!(a.passed());
        cfg.set("parallel", "false").unwrap();
        assert_eq!(run_campaign(&cfg).unwrap(), a);
        // K = 0: y = 0, nothing to select
        assert!(a.outcomes.iter().filter(|o| o.k == 0).all(|o| o.iterations == 0 && o.exact_fast));
    }
}
