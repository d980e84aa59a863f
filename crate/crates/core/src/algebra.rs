//! Binding, similarity and composite n-gram encoding.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::codebook::{Codebook, Family};
use crate::error::{CoreError, Result};
use crate::operator::RecurrentOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindMode {
    /// Elementwise product; bipolar vectors are their own inverses.
    HadamardBipolar,
    /// Pairwise complex product on the paired [real; imag] layout.
    ElementwiseComplex,
    /// Circular convolution via the FFT.
    CircularConvolution,
}

pub fn bind(u: &[f64], v: &[f64], mode: BindMode) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(CoreError::DimensionMismatch { expected: u.len(), got: v.len() });
    }
    match mode {
        BindMode::HadamardBipolar => Ok(u.iter().zip(v).map(|(a, b)| a * b).collect()),
        BindMode::ElementwiseComplex => {
            let n = u.len();
            if n % 2 != 0 {
                return Err(CoreError::InvalidSpec("complex binding needs even length".into()));
            }
            let half = n / 2;
            let mut out = vec![0.0; n];
            for i in 0..half {
                let (ur, ui) = (u[i], u[i + half]);
                let (vr, vi) = (v[i], v[i + half]);
                out[i] = ur * vr - ui * vi;
                out[i + half] = ur * vi + ui * vr;
            }
            Ok(out)
        }
        BindMode::CircularConvolution => Ok(circular_convolution(u, v)),
    }
}

/// Circular convolution of two real vectors, O(N log N).
pub fn circular_convolution(u: &[f64], v: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut a: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut b: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x *= y;
    }
    inv.process(&mut a);
    a.iter().map(|c| c.re / n as f64).collect()
}

/// Similarity of two vectors of the same family. All supported families
/// reduce to the real dot product; for FHRR's paired layout this equals
/// the real part of the conjugate complex dot product.
pub fn similarity(u: &[f64], v: &[f64], _family: Family) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Composite n-gram key: tokens t1..tL map to
/// rho^(L-1)(phi_t1) x rho^(L-2)(phi_t2) x ... x phi_tL
/// under elementwise binding, with rho the permutation operator.
pub fn encode_ngram(
    tokens: &[usize],
    codebook: &Codebook,
    rho: &RecurrentOperator,
) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(CoreError::InvalidSpec("n-gram needs at least one token".into()));
    }
    for &t in tokens {
        if t >= codebook.d {
            return Err(CoreError::TokenOutOfRange { token: t, alphabet: codebook.d });
        }
    }
    let mut acc = codebook.column(tokens[0]).to_vec();
    for &t in &tokens[1..] {
        acc = rho.apply_orthogonal(&acc, 1);
        for (a, b) in acc.iter_mut().zip(codebook.column(t)) {
            *a *= b;
        }
    }
    Ok(acc)
}
