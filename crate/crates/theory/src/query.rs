//! A single query surface mapping network/task parameters to the derived
//! performance numbers, used by the CLI and the CSV export.

use crate::accuracy::{p_corr_numeric, AccuracyGrid};
use crate::error::{Result, TheoryError};
use crate::info::{info_item_symbolic, rho_from_r};
use crate::sensitivity;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SequenceLength {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    None,
    /// Gaussian noise of variance sigma_eta2 added at every encoding step.
    Encoding,
    /// Gaussian noise added once at retrieval.
    Retrieval,
    /// Each state component's sign flips with probability p_f at readout.
    BitFlip,
}

#[derive(Debug, Clone, Copy)]
pub struct TheoryQuery {
    pub n: usize,
    pub d: usize,
    pub m: SequenceLength,
    pub k: u64,
    pub lambda: f64,
    pub sigma_eta2: f64,
    pub noise: NoiseKind,
    pub p_f: f64,
    pub p_s: f64,
    /// Per-component variance of the code distribution.
    pub var_phi: f64,
    /// V(x^2)/V(x)^2 of the code family (finite-M correction).
    pub hit_variance_ratio: f64,
    pub mean_phi: f64,
}

impl TheoryQuery {
    pub fn symbolic(n: usize, d: usize, m: u64) -> TheoryQuery {
        TheoryQuery {
            n,
            d,
            m: SequenceLength::Finite(m),
            k: 1,
            lambda: 1.0,
            sigma_eta2: 0.0,
            noise: NoiseKind::None,
            p_f: 0.0,
            p_s: 1.0,
            var_phi: 1.0,
            hit_variance_ratio: 0.0,
            mean_phi: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SequenceLength::Finite(m) = self.m {
            if m < self.k.max(1) {
                return Err(TheoryError::Domain(format!(
                    "need M >= K >= 1, got M = {m}, K = {}",
                    self.k
                )));
            }
        }
        if self.sigma_eta2 < 0.0 || self.var_phi <= 0.0 {
            return Err(TheoryError::Domain("variances must be positive".into()));
        }
        if !(self.p_s > 0.0 && self.p_s <= 1.0) {
            return Err(TheoryError::Domain("p_s must be in (0,1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryResult {
    pub s: f64,
    pub p_corr: f64,
    /// Channel SNR r = s^2.
    pub r: f64,
    /// Input-output correlation sqrt(r / (r + 1)).
    pub rho: f64,
    pub i_item: f64,
    pub i_total: f64,
    pub epsilon: f64,
}

/// Sensitivity dispatch over the supported model/noise combinations.
pub fn sensitivity(q: &TheoryQuery) -> Result<f64> {
    q.validate()?;
    let noise_ratio = q.sigma_eta2 / q.var_phi;

    if q.lambda < 1.0 {
        // contracting networks: only the noiseless dense-sequence theory
        if !matches!(q.noise, NoiseKind::None) || q.p_s < 1.0 {
            return Err(TheoryError::UnsupportedQuery(
                "contracting weights combine only with noiseless dense sequences".into(),
            ));
        }
        return match q.m {
            SequenceLength::Finite(m) => sensitivity::contracting_reset(q.n, m, q.lambda, q.k),
            SequenceLength::Infinite => sensitivity::contracting_buffer(q.n, q.lambda, q.k),
        };
    }

    let m = match q.m {
        SequenceLength::Finite(m) => m as f64,
        SequenceLength::Infinite => {
            return Err(TheoryError::UnsupportedQuery(
                "an unforgetting network cannot buffer an infinite stream".into(),
            ))
        }
    };
    let m_eff = m * q.p_s;
    match q.noise {
        NoiseKind::None => Ok(sensitivity::universal(q.n, m_eff)),
        NoiseKind::Encoding => Ok(sensitivity::encoding_noise(q.n, m_eff, noise_ratio)),
        NoiseKind::Retrieval => Ok(sensitivity::retrieval_noise(q.n, m_eff, noise_ratio)),
        NoiseKind::BitFlip => {
            if q.p_s < 1.0 {
                return Err(TheoryError::UnsupportedQuery(
                    "bit-flip corruption is derived for dense sequences only".into(),
                ));
            }
            Ok(sensitivity::bit_flip(q.n, m_eff, q.p_f))
        }
    }
}

/// Evaluate the full symbolic result set for one query.
pub fn evaluate(q: &TheoryQuery, grid: AccuracyGrid) -> Result<TheoryResult> {
    let s = sensitivity(q)?;
    let p = p_corr_numeric(s, q.d, grid);
    let r = s * s;
    let i_item = info_item_symbolic(p.max(1.0 / q.d as f64), q.d)?;
    let i_total = match (q.m, q.lambda) {
        (SequenceLength::Finite(m), l) if l == 1.0 => m as f64 * i_item,
        (SequenceLength::Finite(m), _) => {
            let mut total = 0.0;
            for k in 1..=m {
                let sk = sensitivity(&TheoryQuery { k, ..*q })?;
                total += info_item_symbolic(p_corr_numeric(sk, q.d, grid), q.d)?;
            }
            total
        }
        (SequenceLength::Infinite, _) => {
            let mut total = 0.0;
            let s1 = sensitivity(&TheoryQuery { k: 1, ..*q })?;
            let mut k = 1u64;
            loop {
                let sk = sensitivity(&TheoryQuery { k, ..*q })?;
                if sk * sk < 1e-6 * s1 * s1 && k > 1 {
                    break;
                }
                total += info_item_symbolic(p_corr_numeric(sk, q.d, grid), q.d)?;
                k += 1;
                if k > 10_000_000 {
                    break;
                }
            }
            total
        }
    };
    Ok(TheoryResult { s, p_corr: p, r, rho: rho_from_r(r), i_item, i_total, epsilon: 1.0 - p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_matches_direct_formulas() {
        let q = TheoryQuery::symbolic(1000, 27, 250);
        assert_eq!(sensitivity(&q).unwrap(), 2.0);
        let mut qe = q;
        qe.noise = NoiseKind::Encoding;
        qe.sigma_eta2 = 1.0;
        assert!((sensitivity(&qe).unwrap() - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn unitary_sensitivity_is_k_invariant() {
        let q = TheoryQuery::symbolic(1000, 27, 250);
        let s1 = sensitivity(&TheoryQuery { k: 1, ..q }).unwrap();
        let s250 = sensitivity(&TheoryQuery { k: 250, ..q }).unwrap();
        assert_eq!(s1, s250);
    }

    #[test]
    fn incompatible_combinations_are_rejected() {
        let mut q = TheoryQuery::symbolic(1000, 27, 250);
        q.lambda = 0.9;
        q.noise = NoiseKind::BitFlip;
        q.p_f = 0.1;
        assert!(matches!(sensitivity(&q), Err(TheoryError::UnsupportedQuery(_))));
        let mut q2 = TheoryQuery::symbolic(1000, 27, 250);
        q2.m = SequenceLength::Infinite;
        assert!(sensitivity(&q2).is_err());
    }

    #[test]
    fn result_roundtrips_rho_and_r() {
        let q = TheoryQuery::symbolic(2000, 27, 400);
        let res = evaluate(&q, AccuracyGrid::default()).unwrap();
        let r_back = res.rho * res.rho / (1.0 - res.rho * res.rho);
        assert!((r_back - res.r).abs() < 1e-12 * res.r.max(1.0));
        assert!((res.epsilon - (1.0 - res.p_corr)).abs() < 1e-15);
        assert!((res.i_total - 400.0 * res.i_item).abs() < 1e-9);
    }
}
