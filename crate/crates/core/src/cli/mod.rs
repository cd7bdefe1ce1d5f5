//! Command implementations behind the `fastcorr` binary.
//!
//! Every command is a plain function of an [`ExperimentConfig`] that writes
//! its human-readable output to a caller-supplied sink, so the binary stays a
//! thin argument parser and tests can drive commands directly.

mod equiv;
mod verify;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cost_model::{cosamp_relative_cost_at, omp_relative_cost};
use crate::io::{write_instance, write_result, ResultRecord};
use crate::parallel::Execution;
use crate::sensing::{make_instance, SensingOperator};
use crate::solvers::{cosamp_solve, omp_solve, CorrelationMode, RecoveryResult, SolveConfig, SolveError};
use crate::unitary::TransformKind;
use crate::Error;

pub use equiv::{cmd_equiv, equivalence_trial, run_campaign, EquivSummary, TrialOutcome, EQUIV_CSV_HEADER, EQUIV_TOL};
pub use verify::{cmd_verify, verify_all, verify_size, CheckOutcome, Corruption, VerifyReport};

pub const OMP_BENCH_HEADER: &str = "kind,N,M,t,relative_cost";
pub const COSAMP_BENCH_HEADER: &str = "kind,N,K,t,relative_cost";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Omp,
    Cosamp,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Omp => "omp",
            Solver::Cosamp => "cosamp",
        })
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "omp" => Ok(Solver::Omp),
            "cosamp" => Ok(Solver::Cosamp),
            other => Err(Error::InvalidParameter(format!("unknown solver `{other}`"))),
        }
    }
}

impl Solver {
    pub fn config(self, k: usize, mode: CorrelationMode) -> SolveConfig {
        match self {
            Solver::Omp => SolveConfig::omp(k, mode),
            Solver::Cosamp => SolveConfig::cosamp(k, mode),
        }
    }

    pub fn run(self, op: &SensingOperator, y: &[crate::C64], k: usize, cfg: &SolveConfig) -> Result<RecoveryResult, SolveError> {
        match self {
            Solver::Omp => omp_solve(op, y, cfg),
            Solver::Cosamp => cosamp_solve(op, y, k, cfg),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values or combinations. Exit status 2.
    Usage(String),
    /// A check failed or a run could not complete. Exit status 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Failure(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => CliError::Failure(format!("i/o error: {}", io.0)),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parameters of a run. List-valued keys (`kind`, `n`, `m`, `k`, `mode`)
/// form a grid for `bench` and `equiv`; `solve` requires single values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kinds: Vec<TransformKind>,
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub ks: Vec<usize>,
    pub noise_stddev: f64,
    pub trials: usize,
    pub seed: u64,
    pub solver: Solver,
    pub modes: Vec<CorrelationMode>,
    pub t_max: usize,
    /// Output directory (`solve`) or file (`bench`, `equiv`).
    pub out: Option<PathBuf>,
    pub max_n: usize,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kinds: vec![TransformKind::Fourier],
            ns: vec![256],
            ms: vec![64],
            ks: vec![4],
            noise_stddev: 0.0,
            trials: 100,
            seed: 1,
            solver: Solver::Omp,
            modes: vec![CorrelationMode::Conventional, CorrelationMode::Fast],
            t_max: 13,
            out: None,
            max_n: 64,
            execution: Execution::available(),
        }
    }
}

pub const CONFIG_KEYS: &[&str] =
    &["kind", "n", "m", "k", "noise", "trials", "seed", "solver", "mode", "tmax", "out", "max_n", "parallel"];

fn list<T: FromStr>(key: &str, value: &str) -> CliResult<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("invalid value `{s}` for `{key}`"))))
        .collect::<CliResult<_>>()?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("`{key}` needs at least one value")));
    }
    Ok(items)
}

fn single<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.trim().parse().map_err(|_| CliError::Usage(format!("invalid value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    /// Sets one key. Keys accept `-` and `_` interchangeably.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "kind" => self.kinds = list(&key, value)?,
            "n" => self.ns = list(&key, value)?,
            "m" => self.ms = list(&key, value)?,
            "k" => self.ks = list(&key, value)?,
            "noise" | "noise_stddev" => self.noise_stddev = single(&key, value)?,
            "trials" => self.trials = single(&key, value)?,
            "seed" => self.seed = single(&key, value)?,
            "solver" => self.solver = single(&key, value)?,
            "mode" | "modes" => self.modes = list(&key, value)?,
            "tmax" | "t_max" => self.t_max = single(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "max_n" => self.max_n = single(&key, value)?,
            "parallel" => {
                self.execution =
                    if single::<bool>(&key, value)? { Execution::Parallel } else { Execution::Sequential }
            }
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            self.set(key, value)
                .map_err(|e| CliError::Usage(format!("config line {}: {}", i + 1, e.to_string().trim_start_matches("usage error: "))))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        for &n in &self.ns {
            if n < 2 {
                return usage(format!("N = {n} must be at least 2"));
            }
            if self.kinds.contains(&TransformKind::Hadamard) && !n.is_power_of_two() {
                return usage(format!("Hadamard size N = {n} must be a power of two"));
            }
        }
        if self.t_max == 0 {
            return usage("tmax must be at least 1".into());
        }
        if !(self.noise_stddev >= 0.0 && self.noise_stddev.is_finite()) {
            return usage(format!("noise = {} must be finite and ≥ 0", self.noise_stddev));
        }
        Ok(())
    }

    /// Every `(kind, N, M, K)` combination with `K < M ≤ N`.
    pub fn grid(&self) -> CliResult<Vec<(TransformKind, usize, usize, usize)>> {
        let mut cells = Vec::new();
        for &kind in &self.kinds {
            for &n in &self.ns {
                for &m in &self.ms {
                    if m == 0 || m > n {
                        return Err(CliError::Usage(format!("M = {m} must lie in 1..=N (N = {n})")));
                    }
                    for &k in &self.ks {
                        if k >= m {
                            return Err(CliError::Usage(format!("K = {k} must be smaller than M = {m}")));
                        }
                        cells.push((kind, n, m, k));
                    }
                }
            }
        }
        Ok(cells)
    }

    fn only<T: Copy + fmt::Display>(key: &str, values: &[T]) -> CliResult<T> {
        match values {
            [v] => Ok(*v),
            _ => Err(CliError::Usage(format!("`{key}` must have exactly one value for this command"))),
        }
    }
}

fn rust_float(x: f64) -> String {
    // shortest round-trip form, always with a decimal point or exponent
    format!("{x:?}")
}

fn open_out(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Relative-cost sweep over `t = 1..=t_max`, one row per `(kind, N, M, t)`
/// for OMP or `(kind, N, K, t)` for CoSaMP.
pub fn bench_csv(cfg: &ExperimentConfig) -> CliResult<String> {
    cfg.validate()?;
    let mut out = String::new();
    let second = match cfg.solver {
        Solver::Omp => {
            out.push_str(OMP_BENCH_HEADER);
            &cfg.ms
        }
        Solver::Cosamp => {
            out.push_str(COSAMP_BENCH_HEADER);
            &cfg.ks
        }
    };
    out.push('\n');
    for &kind in &cfg.kinds {
        for &n in &cfg.ns {
            for &p in second {
                for t in 1..=cfg.t_max {
                    let rel = match cfg.solver {
                        Solver::Omp => omp_relative_cost(kind, n, t),
                        Solver::Cosamp => cosamp_relative_cost_at(kind, n, p, t),
                    };
                    out.push_str(&format!("{kind},{n},{p},{t},{}\n", rust_float(rel)));
                }
            }
        }
    }
    Ok(out)
}

/// Writes the sweep to `cfg.out`, or to `sink` when no output is set.
pub fn cmd_bench(cfg: &ExperimentConfig, sink: &mut dyn Write) -> CliResult<()> {
    let csv = bench_csv(cfg)?;
    match &cfg.out {
        Some(path) => {
            let mut f = open_out(path)?;
            f.write_all(csv.as_bytes())?;
            f.flush()?;
            writeln!(sink, "wrote {} rows to {}", csv.lines().count() - 1, path.display())?;
        }
        None => sink.write_all(csv.as_bytes())?,
    }
    Ok(())
}

/// Outcome of one mode in [`cmd_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRun {
    pub mode: CorrelationMode,
    pub result: RecoveryResult,
    /// Set when OMP stopped on a numerically dependent column.
    pub rank_deficient: Option<usize>,
}

pub fn result_file_name(solver: Solver, mode: CorrelationMode) -> String {
    format!("result_{solver}_{mode}.txt")
}

pub fn cost_file_name(solver: Solver, mode: CorrelationMode) -> String {
    format!("cost_{solver}_{mode}.csv")
}

/// Draws one instance, solves it in every requested mode and writes
/// `instance.txt`, `result_<solver>_<mode>.txt` and `cost_<solver>_<mode>.csv`
/// into the output directory (default: current directory).
pub fn cmd_solve(cfg: &ExperimentConfig, sink: &mut dyn Write) -> CliResult<Vec<SolveRun>> {
    cfg.validate()?;
    let kind = ExperimentConfig::only("kind", &cfg.kinds)?;
    let n = ExperimentConfig::only("n", &cfg.ns)?;
    let m = ExperimentConfig::only("m", &cfg.ms)?;
    let k = ExperimentConfig::only("k", &cfg.ks)?;
    cfg.grid()?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;

    let op = SensingOperator::random(kind, n, m, crate::sensing::derive_seed(cfg.seed, 0))?;
    let inst = make_instance(&op, k, cfg.noise_stddev, crate::sensing::derive_seed(cfg.seed, 1))?;
    let mut f = open_out(&dir.join("instance.txt"))?;
    write_instance(&mut f, &inst)?;
    f.flush()?;
    writeln!(sink, "instance: {kind} N={n} M={m} K={k} seed={}", cfg.seed)?;
    writeln!(sink, "true support: {}", one_based(&inst.support()))?;

    let mut runs = Vec::new();
    for &mode in &cfg.modes {
        let scfg = cfg.solver.config(k, mode);
        let (result, rank_deficient) = match cfg.solver.run(&op, &inst.y, k, &scfg) {
            Ok(r) => (r, None),
            Err(SolveError::RankDeficient { column, partial }) => (*partial, Some(column)),
            Err(SolveError::Invalid(e)) => return Err(e.into()),
        };
        let record = ResultRecord {
            n,
            iterations: result.iterations_run,
            residual_norm: result.residual_norm,
            solver: cfg.solver.to_string(),
            mode: mode.to_string(),
            support: result.support.clone(),
            coefficients: result.coefficients.clone(),
        };
        let mut f = open_out(&dir.join(result_file_name(cfg.solver, mode)))?;
        write_result(&mut f, &record)?;
        f.flush()?;
        let mut f = open_out(&dir.join(cost_file_name(cfg.solver, mode)))?;
        result.costs.write_csv(&mut f)?;
        f.flush()?;

        writeln!(
            sink,
            "{} {mode}: support [{}] residual {:.6e} iterations {}",
            cfg.solver,
            one_based(&result.support),
            result.residual_norm,
            result.iterations_run
        )?;
        if let Some(col) = rank_deficient {
            writeln!(sink, "  stopped: column {} is numerically dependent on the support", col + 1)?;
        }
        runs.push(SolveRun { mode, result, rank_deficient });
    }
    Ok(runs)
}

fn one_based(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}
