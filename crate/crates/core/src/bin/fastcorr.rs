use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fastcorr::cli::{
    cmd_bench, cmd_equiv, cmd_solve, cmd_verify, CliError, CliResult, Corruption, ExperimentConfig,
};

const SOLVE_HELP: &str = "\
Files written to --out (default: current directory):
  instance.txt                 header `N M K seed kind`, 1-based rows, N lines x_true, M lines y (`re im`)
  result_<solver>_<mode>.txt   header `N iterations residual_norm solver mode`, 1-based support, coefficients
  cost_<solver>_<mode>.csv     t,mode,analytic_flops,counted_flops,relative_vs_conventional
                               (t = 0 row `kernel` is the one-off kernel precomputation, when used)";

const BENCH_HELP: &str = "\
CSV columns:
  omp      kind,N,M,t,relative_cost
  cosamp   kind,N,K,t,relative_cost
relative_cost is the fast-mode correlation cost at iteration t divided by one transform.
Lists are comma separated, e.g. --n 512,4096,8192. Without --out the CSV goes to stdout.";

const EQUIV_HELP: &str = "\
Runs --trials trials per (kind, N, M, K) and compares conventional with fast correlation.
With --out, per-trial CSV columns:
  kind,N,M,K,trial,seed,iterations,mismatch,max_rel_deviation,exact_conventional,exact_fast
Exit status 1 on any selection mismatch or correlation deviation above 1e-10 (relative).";

#[derive(Parser)]
#[command(name = "fastcorr", version, about = "Matching pursuit with fast correlation updates")]
#[command(after_help = "Exit status: 0 success, 1 failed check, 2 usage error.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check unitary constraints, permutation structure and kernel invariants
    /// for every power-of-two N up to --max-n.
    Verify {
        #[arg(long, default_value_t = 64)]
        max_n: usize,
        /// Scale entry ROW,COL (1-based) of each dense matrix before checking.
        #[arg(long, hide = true, value_name = "ROW,COL")]
        corrupt: Option<String>,
    },
    /// Solve one random instance in each requested mode.
    #[command(after_help = SOLVE_HELP)]
    Solve(Common),
    /// Relative-cost sweep over t = 1..tmax.
    #[command(after_help = BENCH_HELP)]
    Bench(Common),
    /// Monte Carlo equivalence campaign.
    #[command(after_help = EQUIV_HELP)]
    Equiv(Common),
}

#[derive(Args)]
struct Common {
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fourier | hadamard (comma list)
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// Complex noise standard deviation per measurement.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// omp | cosamp
    #[arg(long)]
    solver: Option<String>,
    /// conventional | fast | adaptive (comma list)
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    tmax: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn into_config(self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("kind", self.kind),
            ("n", self.n),
            ("m", self.m),
            ("k", self.k),
            ("noise", self.noise),
            ("trials", self.trials),
            ("seed", self.seed),
            ("solver", self.solver),
            ("mode", self.mode),
            ("tmax", self.tmax),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if let Some(out) = self.out {
            cfg.out = Some(out);
        }
        if self.sequential {
            cfg.set("parallel", "false")?;
        }
        Ok(cfg)
    }
}

fn parse_corruption(s: &str) -> CliResult<Corruption> {
    let bad = || CliError::Usage(format!("--corrupt expects ROW,COL (1-based), got `{s}`"));
    let (r, c) = s.split_once(',').ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if r == 0 || c == 0 {
        return Err(bad());
    }
    Ok(Corruption::at(r - 1, c - 1))
}

fn run(cli: Cli) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Verify { max_n, corrupt } => {
            let corruption = corrupt.as_deref().map(parse_corruption).transpose()?;
            cmd_verify(max_n, corruption, &mut out)?;
        }
        Command::Solve(c) => {
            cmd_solve(&c.into_config()?, &mut out)?;
        }
        Command::Bench(c) => cmd_bench(&c.into_config()?, &mut out)?,
        Command::Equiv(c) => {
            cmd_equiv(&c.into_config()?, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fastcorr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
