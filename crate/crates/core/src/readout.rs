//! Naive linear readout: project the state onto the time-stamped codebook.

use crate::codebook::Codebook;
use crate::engine::MemoryState;
use crate::error::{CoreError, Result};
use crate::operator::RecurrentOperator;

/// h_d(K) = phi_d^T W^-K x(M) / c with c = N E(x^2).
///
/// The contraction factor is deliberately not undone here; symbol
/// classification only compares channels, and the analog readout applies
/// its own lambda^-K compensation.
pub fn vsa_linear_readout(
    state: &MemoryState,
    codebook: &Codebook,
    op: &RecurrentOperator,
    k: i64,
) -> Vec<f64> {
    let y = op.apply_orthogonal(&state.x, -k);
    project(&y, codebook)
}

/// Dot every codebook column against an already-rotated state.
pub fn project(y: &[f64], codebook: &Codebook) -> Vec<f64> {
    let c = codebook.normalization();
    codebook
        .columns()
        .map(|col| col.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / c)
        .collect()
}

/// Winner-take-all: argmax with ties broken toward the lowest index.
pub fn classify_wta(h: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in h.iter().enumerate() {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    /// Rejection threshold in signal units (the stored signal has mean 1).
    pub theta: f64,
    /// Prior probability that a slot holds a symbol.
    pub p_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detection {
    Rejected,
    Symbol(usize),
}

/// Reject when no channel reaches theta, otherwise classify.
pub fn detect(h: &[f64], params: &DetectionParams) -> Detection {
    let best = classify_wta(h);
    if h[best] < params.theta {
        Detection::Rejected
    } else {
        Detection::Symbol(best)
    }
}

/// Analog readout with decay compensation: a_hat = lambda^-K V(K)^T x.
pub fn analog_readout_naive(
    state: &MemoryState,
    codebook: &Codebook,
    op: &RecurrentOperator,
    k: i64,
    lambda_floor: f64,
) -> Result<Vec<f64>> {
    let decay = op.lambda.powi(k as i32);
    if decay.abs() < lambda_floor {
        return Err(CoreError::LookbackTooDeep { k, value: decay, floor: lambda_floor });
    }
    let mut h = vsa_linear_readout(state, codebook, op, k);
    if decay != 1.0 {
        let comp = 1.0 / decay;
        for v in h.iter_mut() {
            *v *= comp;
        }
    }
    Ok(h)
}

pub const DEFAULT_LAMBDA_FLOOR: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{CodebookSpec, Family};
    use crate::engine::{encode_sequence, InputEvent, NetworkConfig};
    use crate::operator::OperatorKind;
    use crate::rng;

    #[test]
    fn single_item_reads_back_exactly() {
        let cb = Codebook::generate(&CodebookSpec::new(Family::Hdc, 64, 4, 1)).unwrap();
        let op = RecurrentOperator::make(OperatorKind::Permutation, 64, 1.0, 1).unwrap();
        let cfg = NetworkConfig::new(&cb, &op);
        let mut r = rng::trial_stream(0, 0);
        let st = encode_sequence(&[InputEvent::Symbol(2)], &cfg, &mut r).unwrap();
        let h = vsa_linear_readout(&st, &cb, &op, 0);
        assert!((h[2] - 1.0).abs() < 1e-12);
        for (d, &v) in h.iter().enumerate() {
            if d != 2 {
                assert!(v.abs() < 1.0);
            }
        }
    }

    #[test]
    fn empty_state_reads_zero() {
        let cb = Codebook::generate(&CodebookSpec::new(Family::Hdc, 32, 4, 2)).unwrap();
        let op = RecurrentOperator::make(OperatorKind::Permutation, 32, 1.0, 2).unwrap();
        let st = crate::engine::MemoryState::zeros(32);
        assert!(vsa_linear_readout(&st, &cb, &op, 3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wta_basics_and_tie_rule() {
        assert_eq!(classify_wta(&[0.1, 0.9, 0.2]), 1);
        assert_eq!(classify_wta(&[0.5, 0.5]), 0);
        assert_eq!(classify_wta(&[f64::NEG_INFINITY, -1.0]), 1);
    }

    #[test]
    fn detect_threshold_behaviour() {
        let p = DetectionParams { theta: 0.5, p_s: 0.9 };
        assert_eq!(detect(&[0.1, 0.4, 0.2], &p), Detection::Rejected);
        assert_eq!(detect(&[0.1, 0.8, 0.2], &p), Detection::Symbol(1));
        // theta -> -inf reduces to plain classification
        let p2 = DetectionParams { theta: f64::NEG_INFINITY, p_s: 0.9 };
        let h = [-3.0, -1.0, -2.0];
        assert_eq!(detect(&h, &p2), Detection::Symbol(classify_wta(&h)));
    }

    #[test]
    fn analog_compensation_and_floor() {
        let cb = Codebook::generate(&CodebookSpec::new(Family::Hdc, 64, 2, 3)).unwrap();
        let op = RecurrentOperator::make(OperatorKind::Permutation, 64, 0.5, 3).unwrap();
        let cfg = NetworkConfig::new(&cb, &op);
        let mut r = rng::trial_stream(0, 1);
        let events = vec![InputEvent::Analog(vec![0.7, -0.2]), InputEvent::Empty];
        let st = encode_sequence(&events, &cfg, &mut r).unwrap();
        let a = analog_readout_naive(&st, &cb, &op, 1, DEFAULT_LAMBDA_FLOOR).unwrap();
        assert!((a[0] - 0.7).abs() < 0.3);
        let deep = analog_readout_naive(&st, &cb, &op, 100, DEFAULT_LAMBDA_FLOOR);
        assert!(matches!(deep, Err(CoreError::LookbackTooDeep { .. })));
    }
}
