//! Partial unitary sensing operators `Φ = S_Ω U` and synthetic instances.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cost_model::OpCount;
use crate::unitary::{Direction, StructuredUnitary, TransformKind};
use crate::{Error, Result, C64};

/// Mixes a base seed with a trial index: `seed_i = splitmix64(base ⊕ splitmix64(i))`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix64(base ^ splitmix64(index))
}

/// The measured rows `Ω`, stored sorted and 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSelection {
    rows: Vec<usize>,
    n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectionMode {
    UniformRandom,
    /// 0-based row indices.
    Explicit(Vec<usize>),
}

impl RowSelection {
    pub fn new(n: usize, mut rows: Vec<usize>) -> Result<Self> {
        if rows.is_empty() || rows.len() > n {
            return Err(Error::InvalidSelection(format!(
                "need 1 ≤ M ≤ N, got M = {} with N = {n}",
                rows.len()
            )));
        }
        rows.sort_unstable();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        if let Some(w) = rows.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex(w[0]));
        }
        Ok(RowSelection { rows, n })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, (0..n).collect())
    }

    pub fn uniform_random(n: usize, m: usize, seed: u64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidSelection(format!("need 1 ≤ M ≤ N, got M = {m} with N = {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(n, sample(&mut rng, n, m).into_vec())
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn make_row_selection(n: usize, m: usize, mode: SelectionMode, seed: u64) -> Result<RowSelection> {
    match mode {
        SelectionMode::UniformRandom => RowSelection::uniform_random(n, m, seed),
        SelectionMode::Explicit(rows) => {
            if rows.len() != m {
                return Err(Error::InvalidSelection(format!(
                    "explicit list has {} rows, expected {m}",
                    rows.len()
                )));
            }
            RowSelection::new(n, rows)
        }
    }
}

/// `Φ = S_Ω U`, an `M × N` matrix applied through one fast transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingOperator {
    unitary: StructuredUnitary,
    selection: RowSelection,
}

impl SensingOperator {
    pub fn new(unitary: StructuredUnitary, selection: RowSelection) -> Result<Self> {
        if selection.n() != unitary.size() {
            return Err(Error::DimensionMismatch { expected: unitary.size(), got: selection.n() });
        }
        Ok(SensingOperator { unitary, selection })
    }

    /// Convenience constructor with a seeded uniformly random `Ω`.
    pub fn random(kind: TransformKind, n: usize, m: usize, seed: u64) -> Result<Self> {
        Self::new(StructuredUnitary::new(kind, n)?, RowSelection::uniform_random(n, m, seed)?)
    }

    pub fn unitary(&self) -> &StructuredUnitary {
        &self.unitary
    }

    pub fn selection(&self) -> &RowSelection {
        &self.selection
    }

    pub fn kind(&self) -> TransformKind {
        self.unitary.kind()
    }

    pub fn m(&self) -> usize {
        self.selection.m()
    }

    pub fn n(&self) -> usize {
        self.unitary.size()
    }

    /// `Φ·x`.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.unitary.check_len(x.len())?;
        let mut full = x.to_vec();
        let mut out = vec![C64::new(0.0, 0.0); self.m()];
        self.apply_counted(&mut full, &mut out, &mut OpCount::default(), &mut OpCount::default());
        Ok(out)
    }

    /// `Φᴴ·r`: scatter into `Ω`, then one adjoint transform.
    pub fn apply_adjoint(&self, r: &[C64]) -> Result<Vec<C64>> {
        if r.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: r.len() });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.n()];
        self.apply_adjoint_counted(r, &mut out, &mut OpCount::default(), &mut OpCount::default());
        Ok(out)
    }

    /// `work` (length N) is overwritten by the full transform.
    pub(crate) fn apply_counted(
        &self,
        work: &mut [C64],
        out: &mut [C64],
        transform_ops: &mut OpCount,
        scaling_ops: &mut OpCount,
    ) {
        self.unitary.apply_in_place(work, Direction::Forward, transform_ops);
        for (o, &row) in out.iter_mut().zip(self.selection.rows()) {
            *o = work[row];
        }
        self.unitary.scale_in_place(out, scaling_ops);
    }

    pub(crate) fn apply_adjoint_counted(
        &self,
        r: &[C64],
        out: &mut [C64],
        transform_ops: &mut OpCount,
        scaling_ops: &mut OpCount,
    ) {
        out.fill(C64::new(0.0, 0.0));
        let scale = self.unitary.scale();
        for (&row, &v) in self.selection.rows().iter().zip(r) {
            out[row] = v * scale;
        }
        scaling_ops.real_mul += 2 * r.len() as u64;
        self.unitary.apply_in_place(out, Direction::Adjoint, transform_ops);
    }

    /// Column `φ_j = S_Ω u_j` (length M).
    pub fn column(&self, j: usize) -> Result<Vec<C64>> {
        self.unitary.check_index(j)?;
        Ok(self.column_unchecked(j))
    }

    pub(crate) fn column_unchecked(&self, j: usize) -> Vec<C64> {
        self.selection.rows().iter().map(|&row| self.unitary.entry(row, j)).collect()
    }

    /// `Φ_Λ·x` for coefficients over a support.
    pub fn apply_sparse(&self, support: &[usize], coeffs: &[C64]) -> Result<Vec<C64>> {
        if support.len() != coeffs.len() {
            return Err(Error::DimensionMismatch { expected: support.len(), got: coeffs.len() });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.m()];
        for (&j, &x) in support.iter().zip(coeffs) {
            self.unitary.check_index(j)?;
            for (o, &row) in out.iter_mut().zip(self.selection.rows()) {
                *o += self.unitary.entry(row, j) * x;
            }
        }
        Ok(out)
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng, stddev: f64) -> C64 {
    let s = stddev * std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// A synthetic measurement `y = Φ·x_true + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub operator: SensingOperator,
    pub x_true: Vec<C64>,
    pub y: Vec<C64>,
    pub noise: Vec<C64>,
    pub k: usize,
    pub seed: u64,
}

impl ProblemInstance {
    /// Sorted indices of the nonzero entries of `x_true`.
    pub fn support(&self) -> Vec<usize> {
        self.x_true
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != C64::new(0.0, 0.0))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Draws a `k`-sparse signal with a uniformly random support and unit-variance
/// circular complex Gaussian nonzeros. `noise_stddev` is the standard deviation
/// of each complex noise sample (`E|η_m|² = σ²`).
pub fn make_instance(
    op: &SensingOperator,
    k: usize,
    noise_stddev: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if k >= op.m() {
        return Err(Error::InvalidSparsity { k, m: op.m() });
    }
    if !(noise_stddev >= 0.0 && noise_stddev.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise stddev {noise_stddev} must be finite and ≥ 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support = sample(&mut rng, op.n(), k).into_vec();
    support.sort_unstable();
    let mut x_true = vec![C64::new(0.0, 0.0); op.n()];
    for &j in &support {
        x_true[j] = complex_gaussian(&mut rng, 1.0);
    }
    let noise: Vec<C64> = if noise_stddev > 0.0 {
        (0..op.m()).map(|_| complex_gaussian(&mut rng, noise_stddev)).collect()
    } else {
        vec![C64::new(0.0, 0.0); op.m()]
    };
    let mut y = op.apply(&x_true)?;
    for (a, b) in y.iter_mut().zip(&noise) {
        *a += b;
    }
    Ok(ProblemInstance { operator: op.clone(), x_true, y, noise, k, seed })
}
