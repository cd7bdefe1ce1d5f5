//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use fastcorr::cli::{bench_csv, run_campaign, ExperimentConfig, Solver, TrialOutcome};
use fastcorr::correlation::verify_permutation_property;
use fastcorr::cost_model::{
    conventional_iteration_flops, cosamp_relative_cost, crossover_iteration, fast_flops_per_atom,
    fast_iteration_flops, CorrelationPath,
};
use fastcorr::parallel::Execution;
use fastcorr::sensing::make_instance;
use fastcorr::solvers::{cosamp_solve, omp_solve, CorrelationMode, SolveConfig};
use fastcorr::{SensingOperator, StructuredUnitary, TransformKind};

const KINDS: [TransformKind; 2] = [TransformKind::Fourier, TransformKind::Hadamard];

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn permutation_structure() -> Check {
    let mut count = 0;
    for kind in KINDS {
        for log_n in 1..=6 {
            let n = 1usize << log_n;
            let u = StructuredUnitary::new(kind, n).map_err(|e| e.to_string())?;
            for lambda in 0..n {
                let sigma = verify_permutation_property(&u, lambda)
                    .map_err(|v| format!("{kind} N={n} λ={}: {v}", lambda + 1))?;
                let mut seen = vec![false; n];
                for &s in &sigma {
                    ensure(!seen[s], || format!("{kind} N={n} λ={}: repeated column", lambda + 1))?;
                    seen[s] = true;
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} (kind, N, λ) cases are permutation matrices"))
}

fn mode_equivalence() -> Check {
    const TRIALS_PER_CELL: usize = 84;
    let mut lines = Vec::new();
    for solver in [Solver::Omp, Solver::Cosamp] {
        for kind in KINDS {
            let mut outcomes: Vec<TrialOutcome> = Vec::new();
            for n in [256usize, 1024] {
                let cfg = ExperimentConfig {
                    kinds: vec![kind],
                    ns: vec![n],
                    ms: vec![n / 4, n / 16],
                    ks: vec![1, 4, 8],
                    trials: TRIALS_PER_CELL,
                    seed: 0x5eed ^ n as u64,
                    solver,
                    execution: Execution::available(),
                    ..ExperimentConfig::default()
                };
                outcomes.extend(run_campaign(&cfg).map_err(|e| e.to_string())?.outcomes);
            }
            let trials = outcomes.len();
            let mismatches = outcomes.iter().filter(|o| o.mismatch).count();
            let worst = outcomes.iter().map(|o| o.max_deviation).fold(0.0, f64::max);
            ensure(trials >= 1000, || format!("{solver}/{kind}: only {trials} trials"))?;
            ensure(mismatches == 0, || format!("{solver}/{kind}: {mismatches} of {trials} trials mismatched"))?;
            ensure(worst <= 1e-10, || format!("{solver}/{kind}: correlation deviation {worst:e}"))?;
            lines.push(format!("{solver}/{kind} {trials} trials, max dev {worst:.1e}"));
        }
    }
    Ok(lines.join("; "))
}

fn cost_table_exactness() -> Check {
    let mut cases = 0;
    for log_n in 6..=13u64 {
        let n = 1usize << log_n;
        let nn = n as u64;
        for (kind, conv, per) in
            [(TransformKind::Fourier, 5 * nn * log_n, 6 * nn), (TransformKind::Hadamard, 2 * nn * log_n, 2 * nn)]
        {
            ensure(conventional_iteration_flops(kind, n) == conv, || format!("{kind} N={n}: transform cost"))?;
            for t in 1..=13u64 {
                ensure(fast_flops_per_atom(kind, n) * (t - 1) == per * (t - 1), || {
                    format!("{kind} N={n} t={t}: update cost")
                })?;
                let want = if t == 1 { conv } else { per * (t - 1) };
                ensure(fast_iteration_flops(kind, n, t as usize) == want, || {
                    format!("{kind} N={n} t={t}: iteration cost")
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (kind, N, t) cases match exactly"))
}

fn crossover() -> Check {
    let t_star = crossover_iteration(TransformKind::Fourier, 4096);
    ensure(t_star == 11, || format!("crossover at {t_star}"))?;

    let op = SensingOperator::random(TransformKind::Fourier, 4096, 64, 41).map_err(|e| e.to_string())?;
    let inst = make_instance(&op, 13, 0.01, 42).map_err(|e| e.to_string())?;
    let mut cfg = SolveConfig::omp(13, CorrelationMode::Adaptive);
    cfg.residual_tolerance = 0.0;
    let res = omp_solve(&op, &inst.y, &cfg).map_err(|e| e.to_string())?;
    ensure(res.costs.rows.len() == 13, || format!("ran {} iterations", res.costs.rows.len()))?;
    for row in &res.costs.rows {
        let want = if row.t <= 11 { CorrelationPath::Fast } else { CorrelationPath::Conventional };
        ensure(row.path == want, || format!("iteration {} used {}", row.t, row.path))?;
    }
    let first_conv = res.costs.rows.iter().find(|r| r.path == CorrelationPath::Conventional).map(|r| r.t);
    ensure(first_conv == Some(12), || format!("switched at {first_conv:?}"))?;
    Ok("t* = 11, adaptive OMP switches to transforms at iteration 12".into())
}

fn cosamp_ratio() -> Check {
    let analytic = cosamp_relative_cost(8192, 4);
    ensure((0.36..=0.38).contains(&analytic), || format!("analytic ratio {analytic}"))?;
    ensure((analytic - 24.0 / 65.0).abs() < 1e-15, || format!("analytic ratio {analytic} ≠ 24/65"))?;

    let op = SensingOperator::random(TransformKind::Fourier, 8192, 64, 7).map_err(|e| e.to_string())?;
    let inst = make_instance(&op, 4, 0.01, 8).map_err(|e| e.to_string())?;
    let run = |mode| {
        let mut cfg = SolveConfig::cosamp(4, mode);
        cfg.residual_tolerance = 0.0;
        cosamp_solve(&op, &inst.y, 4, &cfg)
    };
    let fast = run(CorrelationMode::Fast).map_err(|e| e.to_string())?;
    let conv = run(CorrelationMode::Conventional).map_err(|e| e.to_string())?;
    ensure(fast.costs.rows.len() >= 2, || "CoSaMP stopped after one iteration".into())?;
    let mut worst: f64 = 0.0;
    for (f, c) in fast.costs.rows.iter().zip(&conv.costs.rows).skip(1) {
        let counted = f.counted.flops() as f64 / c.counted.flops() as f64;
        worst = worst.max((counted - analytic).abs() / analytic);
    }
    ensure(worst <= 0.05, || format!("counted ratio off by {:.2}%", 100.0 * worst))?;
    Ok(format!("analytic {analytic:.4}, counted within {:.3}%", 100.0 * worst))
}

fn counted_vs_analytic() -> Check {
    let n = 1024usize;
    let log_n = 10u64;
    let mut notes = Vec::new();
    for kind in KINDS {
        let op = SensingOperator::random(kind, n, 64, 11).map_err(|e| e.to_string())?;
        let inst = make_instance(&op, 8, 0.01, 12).map_err(|e| e.to_string())?;
        let run = |mode| {
            let mut cfg = SolveConfig::omp(8, mode);
            cfg.residual_tolerance = 0.0;
            omp_solve(&op, &inst.y, &cfg)
        };
        let conv = run(CorrelationMode::Conventional).map_err(|e| e.to_string())?;
        for row in &conv.costs.rows {
            let counted = row.counted.flops() as f64;
            match kind {
                TransformKind::Hadamard => {
                    ensure(row.counted.complex_add == n as u64 * log_n, || {
                        format!("hadamard t={}: {} additions", row.t, row.counted.complex_add)
                    })?;
                }
                TransformKind::Fourier => {
                    let dev = (counted - row.analytic_flops as f64).abs() / row.analytic_flops as f64;
                    ensure(dev <= 0.05, || format!("fourier t={}: transform count off by {dev:.3}", row.t))?;
                }
            }
        }
        let fast = run(CorrelationMode::Fast).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for row in fast.costs.rows.iter().filter(|r| r.t >= 2) {
            let analytic = fast_iteration_flops(kind, n, row.t) as f64;
            worst = worst.max((row.counted.flops() as f64 - analytic).abs() / analytic);
        }
        ensure(worst <= 0.10, || format!("{kind} fast counts off by {:.2}%", 100.0 * worst))?;
        notes.push(format!("{kind} fast within {:.2}%", 100.0 * worst));
    }
    Ok(format!("transform counts exact; {}", notes.join(", ")))
}

fn bench_shape() -> Check {
    let cfg = ExperimentConfig {
        kinds: vec![TransformKind::Fourier],
        ns: vec![512, 4096, 8192],
        ms: vec![64],
        t_max: 13,
        solver: Solver::Omp,
        ..ExperimentConfig::default()
    };
    let csv = bench_csv(&cfg).map_err(|e| e.to_string())?;
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let n: usize = f[1].parse().map_err(|_| format!("bad row {line}"))?;
        let t: usize = f[3].parse().map_err(|_| format!("bad row {line}"))?;
        let rel: f64 = f[4].parse().map_err(|_| format!("bad row {line}"))?;
        let slope = 6.0 / (5.0 * (n as f64).log2());
        let want = if t == 1 { 1.0 } else { slope * (t - 1) as f64 };
        if t == 1 {
            ensure(rel == 1.0, || format!("N={n} t=1: {rel}"))?;
        }
        ensure((rel - want).abs() <= 1e-12, || format!("N={n} t={t}: {rel} vs {want}"))?;
        rows += 1;
    }
    ensure(rows == 39, || format!("{rows} rows"))?;
    Ok(format!("{rows} rows on the lines 6(t−1)/(5·log₂N), 1.0 at t=1"))
}

fn exact_recovery() -> Check {
    let cfg = ExperimentConfig {
        kinds: vec![TransformKind::Fourier],
        ns: vec![256],
        ms: vec![64],
        ks: vec![4],
        trials: 500,
        seed: 2024,
        solver: Solver::Omp,
        ..ExperimentConfig::default()
    };
    let summary = run_campaign(&cfg).map_err(|e| e.to_string())?;
    let differing = summary.outcomes.iter().filter(|o| o.exact_fast != o.exact_conventional).count();
    ensure(differing == 0, || format!("{differing} trials differ between modes"))?;
    ensure(summary.exact_conventional * 100 >= 95 * summary.trials, || {
        format!("{}/{} exact", summary.exact_conventional, summary.trials)
    })?;
    Ok(format!("{}/{} exact in both modes", summary.exact_conventional, summary.trials))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("permutation structure of UᴴD_λU", permutation_structure),
        ("fast/conventional mode equivalence", mode_equivalence),
        ("transform and update cost formulas", cost_table_exactness),
        ("adaptive crossover at N=4096", crossover),
        ("CoSaMP relative cost at N=8192, K=4", cosamp_ratio),
        ("counted vs analytic flops", counted_vs_analytic),
        ("relative-cost sweep shape", bench_shape),
        ("noiseless OMP exact recovery", exact_recovery),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
