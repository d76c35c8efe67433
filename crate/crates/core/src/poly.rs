//! Dense univariate polynomials stored highest power first.
//!
//! These helpers only need ring operations, so they work for the float
//! scalars used in fitting as well as exact rationals in tests.

use num_traits::Num;

/// Horner evaluation of `coeffs[0] x^n + ... + coeffs[n]`.
pub fn horner<N: Num + Copy>(coeffs: &[N], x: N) -> N {
    coeffs.iter().fold(N::zero(), |acc, &c| acc * x + c)
}

/// Term-by-term evaluation with explicit powers. Slower and less accurate
/// than [`horner`]; kept as an independent evaluation path.
pub fn power_sum<N: Num + Copy>(coeffs: &[N], x: N) -> N {
    let degree = coeffs.len().saturating_sub(1);
    coeffs.iter().enumerate().fold(N::zero(), |acc, (i, &c)| {
        let power = (0..degree - i).fold(N::one(), |p, _| p * x);
        acc + c * power
    })
}

/// Rewrites `p(s)` with `s = scale * t + offset` as a polynomial in `t`.
///
/// Exact in exact arithmetic: this is Horner's scheme run over polynomials,
/// multiplying the running result by the linear factor at each step.
pub fn compose_affine<N: Num + Copy>(coeffs: &[N], scale: N, offset: N) -> Vec<N> {
    // ascending-order accumulator
    let mut acc: Vec<N> = Vec::with_capacity(coeffs.len());
    for &c in coeffs {
        let mut next = vec![N::zero(); acc.len() + 1];
        for (k, &a) in acc.iter().enumerate() {
            next[k] = next[k] + a * offset;
            next[k + 1] = next[k + 1] + a * scale;
        }
        next[0] = next[0] + c;
        acc = next;
    }
    acc.reverse();
    acc
}
