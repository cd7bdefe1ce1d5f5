use std::io::Write;

use crate::correlation::{apply_hadamard_generators, extract_permutation, hadamard_generators, CorrelationKernel, PermutationAction};
use crate::sensing::{derive_seed, make_instance, RowSelection, SensingOperator};
use crate::unitary::dense::{verify_constraints, DenseMatrix};
use crate::unitary::{StructuredUnitary, TransformKind};
use crate::C64;

use super::{CliError, CliResult};

const KERNEL_TOL: f64 = 1e-12;
const UPDATE_TOL: f64 = 1e-10;

/// Test hook: scales one entry of every dense matrix large enough to hold it,
/// so the structural checks have something to catch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corruption {
    pub row: usize,
    pub col: usize,
    pub factor: f64,
}

impl Corruption {
    pub fn at(row: usize, col: usize) -> Self {
        Corruption { row, col, factor: 1.25 }
    }

    fn apply(&self, d: &mut DenseMatrix) {
        if self.row < d.size() && self.col < d.size() {
            let v = d.get(self.row, self.col);
            d.set(self.row, self.col, v * self.factor);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub kind: TransformKind,
    pub n: usize,
    pub name: &'static str,
    /// `None` on success, otherwise the first problem found.
    pub failure: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

fn rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Runs every check for one `(kind, N)`.
pub fn verify_size(kind: TransformKind, n: usize, corruption: Option<Corruption>) -> CliResult<Vec<CheckOutcome>> {
    let u = StructuredUnitary::new(kind, n)?;
    let mut dense = DenseMatrix::from_unitary(&u);
    if let Some(c) = corruption {
        c.apply(&mut dense);
    }
    let mut out = Vec::new();
    let mut record = |name, failure: Option<String>| out.push(CheckOutcome { kind, n, name, failure });

    // structural constraints and the closure table
    let table = verify_constraints(&dense);
    record("constraints", table.as_ref().err().map(|v| v.to_string()));
    let product = match &table {
        Ok(t) => (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| u.product_index(i, j).ok() != Some(t.table[i][j]))
            .map(|(i, j)| {
                format!("product of columns {} and {}: closed form disagrees with the search", i + 1, j + 1)
            }),
        Err(_) => Some("no closure table (constraints failed)".into()),
    };
    record("product_index", product);

    // U^H D_λ U is a permutation, and it is the one the fast path applies
    let mut perm_failure = None;
    let mut action_failure = None;
    for lambda in 0..n {
        match extract_permutation(&dense, lambda) {
            Err(v) => {
                perm_failure.get_or_insert_with(|| format!("λ = {}: {v}", lambda + 1));
            }
            Ok(sigma) => {
                let action = PermutationAction::new(kind, n, lambda)?;
                if let Some(k) = (0..n).find(|&k| sigma[k] != action.source(k)) {
                    action_failure.get_or_insert_with(|| {
                        format!("λ = {}: row {} maps to {}, index map gives {}", lambda + 1, k + 1, sigma[k] + 1, action.source(k) + 1)
                    });
                }
            }
        }
    }
    record("permutation", perm_failure);
    record("permutation_action", action_failure);

    if kind == TransformKind::Hadamard {
        let v: Vec<C64> = (0..n).map(|k| C64::new(k as f64 + 1.0, (k * k) as f64)).collect();
        let mut failure = None;
        for lambda in 0..n {
            let gens = hadamard_generators(lambda, n)?;
            if apply_hadamard_generators(&gens, &v) != PermutationAction::new(kind, n, lambda)?.apply(&v)? {
                failure = Some(format!("λ = {}: generator composition differs", lambda + 1));
                break;
            }
        }
        record("hadamard_generators", failure);
    }

    // kernel invariants against the dense oracle
    let mut sizes = vec![1, n / 2, n];
    sizes.dedup();
    let mut kernel_failure = None;
    let mut update_failure = None;
    for &m in sizes.iter().filter(|&&m| m >= 1) {
        let seed = derive_seed(n as u64, m as u64);
        let op = SensingOperator::new(u.clone(), RowSelection::uniform_random(n, m, seed)?)?;
        let kernel = CorrelationKernel::compute(&op);
        let c = kernel.values();
        let oracle: Vec<C64> = (0..n)
            .map(|k| op.selection().rows().iter().map(|&w| dense.get(w, k).conj() * dense.get(w, 0)).sum())
            .collect();
        let ratio = m as f64 / n as f64;
        let problem = if rel_diff(c, &oracle) > KERNEL_TOL {
            Some("differs from the dense product".to_string())
        } else if (c[0] - ratio).norm() > KERNEL_TOL {
            Some(format!("c[1] = {} instead of M/N = {ratio}", c[0]))
        } else {
            match kind {
                TransformKind::Fourier => (1..n)
                    .find(|&k| (c[k] - c[n - k].conj()).norm() > KERNEL_TOL)
                    .map(|k| format!("not conjugate symmetric at {}", k + 1)),
                TransformKind::Hadamard => (0..n)
                    .find(|&k| {
                        let scaled = c[k] * n as f64;
                        let r = scaled.re.round();
                        (scaled - r).norm() > 1e-9 || (r as i64 - m as i64) % 2 != 0
                    })
                    .map(|k| format!("N·c[{}] is not an integer of the parity of M", k + 1)),
            }
        };
        if let Some(p) = problem {
            kernel_failure.get_or_insert_with(|| format!("M = {m}: {p}"));
        }

        if m >= 2 {
            let inst = make_instance(&op, (m - 1).min(3), 0.5, seed ^ 1)?;
            let support = inst.support();
            let coeffs: Vec<C64> = support.iter().map(|&j| inst.x_true[j]).collect();
            let h0 = op.apply_adjoint(&inst.y)?;
            let fast = kernel.fast_update(&h0, &support, &coeffs)?;
            let fit = op.apply_sparse(&support, &coeffs)?;
            let r: Vec<C64> = inst.y.iter().zip(&fit).map(|(a, b)| a - b).collect();
            let direct = op.apply_adjoint(&r)?;
            let dev = rel_diff(&fast, &direct);
            if dev > UPDATE_TOL {
                update_failure.get_or_insert_with(|| format!("M = {m}: relative deviation {dev:.3e}"));
            }
        }
    }
    record("kernel", kernel_failure);
    record("fast_update", update_failure);
    Ok(out)
}

/// Both kinds, every power of two `2 ≤ N ≤ max_n`.
pub fn verify_all(max_n: usize, corruption: Option<Corruption>) -> CliResult<VerifyReport> {
    if max_n < 2 {
        return Err(CliError::Usage(format!("max_n = {max_n} must be at least 2")));
    }
    let mut report = VerifyReport::default();
    for kind in [TransformKind::Fourier, TransformKind::Hadamard] {
        let mut n = 2;
        while n <= max_n {
            report.checks.extend(verify_size(kind, n, corruption)?);
            n *= 2;
        }
    }
    Ok(report)
}

/// Prints one line per check; fails if any check failed.
pub fn cmd_verify(max_n: usize, corruption: Option<Corruption>, sink: &mut dyn Write) -> CliResult<VerifyReport> {
    let report = verify_all(max_n, corruption)?;
    for c in &report.checks {
        match &c.failure {
            None => writeln!(sink, "PASS {} N={} {}", c.kind, c.n, c.name)?,
            Some(why) => writeln!(sink, "FAIL {} N={} {}: {why}", c.kind, c.n, c.name)?,
        }
    }
    let failed = report.failures().count();
    writeln!(sink, "{} checks, {failed} failed", report.checks.len())?;
    if failed > 0 {
        let first = report.failures().next().expect("at least one failure");
        return Err(CliError::Failure(format!(
            "verification failed: {} N={} {}",
            first.kind, first.n, first.name
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sizes_pass() {
        let report = verify_all(16, None).unwrap();
        assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
        let trivial = verify_all(2, None).unwrap();
        assert!(trivial.passed());
    }

    #[test]
    fn corruption_is_named() {
        let mut sink = Vec::new();
        let err = cmd_verify(8, Some(Corruption::at(2, 3)), &mut sink).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let text = String::from_utf8(sink).unwrap();
        assert!(text.contains("PASS fourier N=2 constraints"));
        assert!(text.contains("FAIL fourier N=4 constraints: entry magnitude: |U[3, 4]|"), "{text}");
    }

    #[test]
    fn tiny_max_n_is_usage_error() {
        assert_eq!(verify_all(1, None).unwrap_err().exit_code(), 2);
    }
}
