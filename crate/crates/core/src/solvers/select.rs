//! Identification: choosing the largest-magnitude entries.
//!
//! Magnitudes within a relative `TIE_TOL` of each other count as equal and
//! the smaller index wins. Structured sensing matrices can have columns that
//! coincide (up to sign) on `Ω`, giving correlations that are equal in exact
//! arithmetic; the tolerance makes the choice independent of which route
//! computed them.

use crate::cost_model::OpCount;
use crate::C64;

/// Relative tolerance on squared magnitudes.
pub const TIE_TOL: f64 = 1e-9;

pub(crate) fn squared_magnitudes(h: &[C64], ops: &mut OpCount) -> Vec<f64> {
    ops.real_mul += 2 * h.len() as u64;
    ops.real_add += h.len() as u64;
    h.iter().map(|x| x.norm_sqr()).collect()
}

/// Index of the largest value among entries not `excluded`.
pub(crate) fn argmax(values: &[f64], excluded: &[bool]) -> Option<usize> {
    let max = values
        .iter()
        .zip(excluded)
        .filter(|(_, &skip)| !skip)
        .map(|(&v, _)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let floor = max - TIE_TOL * max;
    values
        .iter()
        .zip(excluded)
        .position(|(&v, &skip)| !skip && v >= floor)
}

/// Indices of the `s` largest values, ascending. Ties at the cut-off go to
/// the smallest indices.
pub(crate) fn select_largest(values: &[f64], s: usize) -> Vec<usize> {
    let s = s.min(values.len());
    if s == 0 {
        return Vec::new();
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOL * max;
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let cut = sorted[s - 1];

    let mut chosen: Vec<usize> = (0..values.len()).filter(|&i| values[i] > cut + tol).collect();
    let ties = (0..values.len()).filter(|&i| (values[i] - cut).abs() <= tol);
    let room = s - chosen.len();
    chosen.extend(ties.take(room));
    chosen.sort_unstable();
    chosen
}
