//! Least squares over a support: `min ‖y − Φ_Λ x‖₂`.

use crate::cost_model::OpCount;
use crate::sensing::SensingOperator;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LsMethod {
    /// Thin QR grown one column at a time (modified Gram–Schmidt with one
    /// reorthogonalization pass).
    #[default]
    IncrementalQr,
    /// Cholesky factorization of `Φ_Λᴴ Φ_Λ`, rebuilt on every call.
    NormalEquations,
}

/// A column is dependent when its norm after projection falls below this
/// fraction of its original norm.
pub const RANK_TOL: f64 = 1e-10;

/// Normal equations square the conditioning, so a Cholesky pivot is compared
/// with the diagonal entry at a looser ratio (`1e-10` on squared norms).
pub const PIVOT_TOL: f64 = 1e-10;

/// Position (within the support) of the first numerically dependent column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankDeficient {
    pub position: usize,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn count_dot(ops: &mut OpCount, m: usize) {
    ops.complex_mul += m as u64;
    ops.complex_add += m.saturating_sub(1) as u64;
}

/// Thin QR of `Φ_Λ` with `Qᴴy` kept alongside.
#[derive(Debug, Clone, Default)]
pub(crate) struct IncrementalQr {
    q: Vec<Vec<C64>>,
    /// Column `j` of the upper-triangular factor, `j + 1` entries.
    r: Vec<Vec<C64>>,
    qty: Vec<C64>,
}

impl IncrementalQr {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a column; leaves the factorization unchanged and returns
    /// `false` if it is numerically dependent on those already present.
    pub fn push(&mut self, column: &[C64], y: &[C64], ops: &mut OpCount) -> bool {
        let m = column.len();
        let original = norm(column);
        let mut v = column.to_vec();
        let mut coeffs = vec![C64::new(0.0, 0.0); self.q.len()];
        for _ in 0..2 {
            for (q, c) in self.q.iter().zip(coeffs.iter_mut()) {
                let proj = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
                *c += proj;
                count_dot(ops, m);
                ops.complex_mul += m as u64;
                ops.complex_add += m as u64 + 1;
            }
        }
        let residual = norm(&v);
        ops.real_mul += 2 * m as u64;
        ops.real_add += 2 * m as u64;
        if residual <= RANK_TOL * original || original == 0.0 {
            return false;
        }
        for x in v.iter_mut() {
            *x /= residual;
        }
        ops.real_mul += 2 * m as u64;
        coeffs.push(C64::new(residual, 0.0));
        self.qty.push(dot(&v, y));
        count_dot(ops, m);
        self.q.push(v);
        self.r.push(coeffs);
        true
    }

    /// Back substitution `R x = Qᴴy`.
    pub fn solve(&self, ops: &mut OpCount) -> Vec<C64> {
        let k = self.q.len();
        let mut x = self.qty.clone();
        for j in (0..k).rev() {
            x[j] /= self.r[j][j];
            let xj = x[j];
            for (i, xi) in x.iter_mut().enumerate().take(j) {
                *xi -= self.r[j][i] * xj;
            }
            ops.complex_mul += j as u64;
            ops.complex_add += j as u64;
            ops.real_mul += 2;
        }
        x
    }
}

/// Cholesky of the Gram matrix, skipping columns whose pivot collapses.
/// Returns the coefficients (zero at skipped positions) and the skipped
/// positions.
fn normal_equations(columns: &[Vec<C64>], y: &[C64], ops: &mut OpCount) -> (Vec<C64>, Vec<usize>) {
    let k = columns.len();
    let m = y.len();
    let mut gram = vec![vec![C64::new(0.0, 0.0); k]; k];
    for i in 0..k {
        for j in 0..=i {
            gram[i][j] = dot(&columns[i], &columns[j]);
            count_dot(ops, m);
        }
    }
    let rhs: Vec<C64> = columns.iter().map(|c| dot(c, y)).collect();
    ops.complex_mul += (k * m) as u64;
    ops.complex_add += (k * m.saturating_sub(1)) as u64;

    // lower-triangular factor over kept positions
    let mut kept: Vec<usize> = Vec::new();
    let mut skipped = Vec::new();
    let mut l: Vec<Vec<C64>> = Vec::new();
    for i in 0..k {
        let mut row: Vec<C64> = Vec::with_capacity(kept.len() + 1);
        for (a, &j) in kept.iter().enumerate() {
            let mut s = gram[i][j];
            for b in 0..a {
                s -= row[b] * l[a][b].conj();
            }
            row.push(s / l[a][a]);
            ops.complex_mul += a as u64 + 1;
            ops.complex_add += a as u64;
        }
        let pivot = gram[i][i].re - row.iter().map(|x| x.norm_sqr()).sum::<f64>();
        ops.real_mul += 2 * row.len() as u64;
        ops.real_add += 2 * row.len() as u64;
        if pivot <= PIVOT_TOL * gram[i][i].re || gram[i][i].re == 0.0 {
            skipped.push(i);
            continue;
        }
        row.push(C64::new(pivot.sqrt(), 0.0));
        l.push(row);
        kept.push(i);
    }

    // L z = b, then Lᴴ x = z
    let r = kept.len();
    let mut z = vec![C64::new(0.0, 0.0); r];
    for a in 0..r {
        let mut s = rhs[kept[a]];
        for b in 0..a {
            s -= l[a][b] * z[b];
        }
        z[a] = s / l[a][a];
    }
    let mut x = vec![C64::new(0.0, 0.0); r];
    for a in (0..r).rev() {
        let mut s = z[a];
        for b in a + 1..r {
            s -= l[b][a].conj() * x[b];
        }
        x[a] = s / l[a][a];
    }
    ops.complex_mul += (r * r) as u64;
    ops.complex_add += (r * r) as u64;

    let mut out = vec![C64::new(0.0, 0.0); k];
    for (a, &i) in kept.iter().enumerate() {
        out[i] = x[a];
    }
    (out, skipped)
}

/// Basic least-squares solution: dependent columns (in support order) get a
/// zero coefficient and are reported.
pub(crate) fn solve_dropping(
    op: &SensingOperator,
    support: &[usize],
    y: &[C64],
    method: LsMethod,
    ops: &mut OpCount,
) -> (Vec<C64>, Vec<usize>) {
    let columns: Vec<Vec<C64>> = support.iter().map(|&j| op.column_unchecked(j)).collect();
    match method {
        LsMethod::NormalEquations => normal_equations(&columns, y, ops),
        LsMethod::IncrementalQr => {
            let mut qr = IncrementalQr::new();
            let mut kept = Vec::new();
            let mut dropped = Vec::new();
            for (pos, col) in columns.iter().enumerate() {
                if qr.push(col, y, ops) {
                    kept.push(pos);
                } else {
                    dropped.push(pos);
                }
            }
            let x = qr.solve(ops);
            let mut out = vec![C64::new(0.0, 0.0); support.len()];
            for (&pos, v) in kept.iter().zip(x) {
                out[pos] = v;
            }
            (out, dropped)
        }
    }
}

/// Minimizes `‖y − Φ_Λ x‖₂`, failing if `Φ_Λ` is numerically rank deficient.
pub fn least_squares(
    op: &SensingOperator,
    support: &[usize],
    y: &[C64],
    method: LsMethod,
) -> Result<Vec<C64>, RankDeficient> {
    assert_eq!(y.len(), op.m(), "measurement length");
    assert!(support.iter().all(|&j| j < op.n()), "support index out of range");
    let (x, dropped) = solve_dropping(op, support, y, method, &mut OpCount::default());
    match dropped.first() {
        Some(&position) => Err(RankDeficient { position }),
        None => Ok(x),
    }
}

/// Solver-side state for the normal-equations route, which refactors on
/// every call.
#[derive(Debug, Clone)]
pub(crate) enum GrowingLs {
    Qr(IncrementalQr),
    Normal(Vec<Vec<C64>>),
}

impl GrowingLs {
    pub fn new(method: LsMethod) -> Self {
        match method {
            LsMethod::IncrementalQr => GrowingLs::Qr(IncrementalQr::new()),
            LsMethod::NormalEquations => GrowingLs::Normal(Vec::new()),
        }
    }

    /// Adds a column and re-solves. `None` when the column is dependent; the
    /// state is then unchanged.
    pub fn push_and_solve(&mut self, column: Vec<C64>, y: &[C64], ops: &mut OpCount) -> Option<Vec<C64>> {
        match self {
            GrowingLs::Qr(qr) => qr.push(&column, y, ops).then(|| qr.solve(ops)),
            GrowingLs::Normal(columns) => {
                columns.push(column);
                let (x, skipped) = normal_equations(columns, y, ops);
                if skipped.is_empty() {
                    Some(x)
                } else {
                    columns.pop();
                    None
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::SensingOperator;
    use crate::unitary::TransformKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn single_column_projection() {
        for kind in [TransformKind::Fourier, TransformKind::Hadamard] {
            let op = SensingOperator::random(kind, 64, 16, 1).unwrap();
            let y = op.column(9).unwrap();
            for method in [LsMethod::IncrementalQr, LsMethod::NormalEquations] {
                let x = least_squares(&op, &[9], &y, method).unwrap();
                assert!((x[0] - C64::new(1.0, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn methods_agree_and_residual_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [TransformKind::Fourier, TransformKind::Hadamard] {
            for trial in 0..20 {
                let op = SensingOperator::random(kind, 256, 64, trial).unwrap();
                let support: Vec<usize> = (0..6).map(|_| rng.random_range(0..256)).collect();
                let mut support = support;
                support.sort_unstable();
                support.dedup();
                let y = random_vec(&mut rng, 64);
                let (Ok(a), Ok(b)) = (
                    least_squares(&op, &support, &y, LsMethod::IncrementalQr),
                    least_squares(&op, &support, &y, LsMethod::NormalEquations),
                ) else {
                    continue;
                };
                for (p, q) in a.iter().zip(&b) {
                    assert!((p - q).norm() < 1e-8);
                }
                let fit = op.apply_sparse(&support, &a).unwrap();
                let r: Vec<C64> = y.iter().zip(&fit).map(|(p, q)| p - q).collect();
                for &j in &support {
                    assert!(dot(&op.column(j).unwrap(), &r).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn dependent_columns_are_reported() {
        // Hadamard columns j and j ⊕ 1 coincide when every selected row is even
        let op = SensingOperator::new(
            crate::unitary::StructuredUnitary::hadamard(16).unwrap(),
            crate::sensing::RowSelection::new(16, vec![0, 2, 4, 6]).unwrap(),
        )
        .unwrap();
        let y = op.column(3).unwrap();
        for method in [LsMethod::IncrementalQr, LsMethod::NormalEquations] {
            assert_eq!(least_squares(&op, &[3, 2], &y, method), Err(RankDeficient { position: 1 }));
            let (x, dropped) = solve_dropping(&op, &[3, 2, 5], &y, method, &mut OpCount::default());
            assert_eq!(dropped, vec![1]);
            assert!((x[0] - C64::new(1.0, 0.0)).norm() < 1e-10);
            assert_eq!(x[1], C64::new(0.0, 0.0));
        }
    }
}
