//! Unnormalized in-place transform kernels. Callers apply the `1/√N` factor.

use crate::cost_model::OpCount;
use crate::C64;

fn bit_reverse_permute(buf: &mut [C64]) {
    let n = buf.len();
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }
}

/// Iterative radix-2 decimation-in-time FFT.
///
/// `roots[k] = exp(-2πi k / N)`. With `inverse` the conjugate roots are used,
/// giving the unnormalized inverse DFT. Each butterfly is one complex
/// multiplication and two complex additions.
pub(crate) fn fft_radix2(buf: &mut [C64], roots: &[C64], inverse: bool, ops: &mut OpCount) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    debug_assert_eq!(roots.len(), n);
    bit_reverse_permute(buf);

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for block in buf.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(half);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let w = roots[k * stride];
                let w = if inverse { w.conj() } else { w };
                let t = *b * w;
                *b = *a - t;
                *a += t;
            }
        }
        ops.complex_mul += (n / 2) as u64;
        ops.complex_add += n as u64;
        len <<= 1;
    }
}

/// Fast Walsh–Hadamard transform in natural (Sylvester) order:
/// `out[m] = Σ_n (-1)^popcount(m & n) · in[n]`. `N log₂N` complex additions.
pub(crate) fn fwht(buf: &mut [C64], ops: &mut OpCount) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in buf.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        ops.complex_add += n as u64;
        h <<= 1;
    }
}

/// Direct `O(N²)` DFT for sizes the radix-2 kernel cannot handle.
pub(crate) fn dft_dense(buf: &mut [C64], roots: &[C64], inverse: bool, ops: &mut OpCount) {
    let n = buf.len();
    debug_assert_eq!(roots.len(), n);
    let input = buf.to_vec();
    for (m, out) in buf.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (j, x) in input.iter().enumerate() {
            let w = roots[(m * j) % n];
            acc += *x * if inverse { w.conj() } else { w };
        }
        *out = acc;
    }
    let n = n as u64;
    ops.complex_mul += n * n;
    ops.complex_add += n * n.saturating_sub(1);
}
