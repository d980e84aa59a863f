//! Sensitivity s = (signal mean) / (noise sd) for the linear readout,
//! for every supported network and noise variant.

use crate::error::{Result, TheoryError};

/// s = sqrt(N / M): the universal large-M law for any zero-mean codebook
/// with a unitary recurrence.
pub fn universal(n: usize, m: f64) -> f64 {
    (n as f64 / m).sqrt()
}

/// Gaussian noise added during encoding, ratio = sigma_eta^2 / V_phi.
pub fn encoding_noise(n: usize, m: f64, noise_ratio: f64) -> f64 {
    (n as f64 / (m * (1.0 + noise_ratio))).sqrt()
}

/// White noise added only at retrieval.
pub fn retrieval_noise(n: usize, m: f64, noise_ratio: f64) -> f64 {
    (n as f64 / (m + noise_ratio)).sqrt()
}

/// Sign flips of the state components at readout, probability p_f each.
pub fn bit_flip(n: usize, m: f64, p_f: f64) -> f64 {
    let a = 1.0 - 2.0 * p_f;
    (n as f64 * a * a / (m + 2.0 * p_f)).sqrt()
}

/// Sparse input sequences: only the nonzero slots add crosstalk.
pub fn sparse(n: usize, m: f64, p_s: f64) -> f64 {
    universal(n, m * p_s)
}

/// Finite-M moment correction, nu = V(x^2)/V(x)^2 of the code family.
pub fn general_moment(n: usize, m: f64, hit_variance_ratio: f64) -> f64 {
    (n as f64 / (m - 1.0 + hit_variance_ratio)).sqrt()
}

/// Contracting weights, reset memory of length M, lookback K.
pub fn contracting_reset(n: usize, m: u64, lambda: f64, k: u64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda == 1.0 {
        return Ok(universal(n, m as f64));
    }
    let l2 = lambda * lambda;
    let denom = 1.0 - l2.powi(m as i32);
    Ok(lambda.powi(k as i32) * (n as f64 * (1.0 - l2) / denom).sqrt())
}

/// Contracting weights, saturated buffer (M -> infinity), lookback K.
pub fn contracting_buffer(n: usize, lambda: f64, k: u64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda >= 1.0 {
        return Err(TheoryError::Domain("buffer sensitivity needs lambda < 1".into()));
    }
    Ok(lambda.powi(k as i32) * (n as f64 * (1.0 - lambda * lambda)).sqrt())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(TheoryError::Domain(format!("lambda must be in (0,1], got {lambda}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universal_anchor() {
        assert_eq!(universal(1000, 250.0), 2.0);
    }

    #[test]
    fn encoding_noise_anchor() {
        // sigma^2 = V_phi halves the squared sensitivity
        let s = encoding_noise(1000, 250.0, 1.0);
        assert!((s - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn bit_flip_reduces_to_universal() {
        assert!((bit_flip(1000, 250.0, 0.0) - 2.0).abs() < 1e-12);
        assert!(bit_flip(1000, 250.0, 0.1) < 2.0);
    }

    #[test]
    fn sparse_depends_on_product_only() {
        assert_eq!(sparse(1000, 500.0, 0.5), universal(1000, 250.0));
    }

    #[test]
    fn unitary_reset_has_no_recency() {
        let a = contracting_reset(1000, 250, 1.0, 1).unwrap();
        let b = contracting_reset(1000, 250, 1.0, 250).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn contracting_forms_decay_exponentially() {
        let s1 = contracting_buffer(10_000, 0.999, 1).unwrap();
        let s2 = contracting_buffer(10_000, 0.999, 101).unwrap();
        assert!((s2 / s1 - 0.999f64.powi(100)).abs() < 1e-12);
        // reset form approaches the buffer form for huge M
        let r = contracting_reset(10_000, 1_000_000, 0.999, 5).unwrap();
        let b = contracting_buffer(10_000, 0.999, 5).unwrap();
        assert!((r - b).abs() < 1e-9);
    }

    #[test]
    fn general_moment_known_families() {
        // bipolar: nu = 0; gaussian: nu = 2
        assert!((general_moment(1000, 250.0, 0.0) - (1000.0f64 / 249.0).sqrt()).abs() < 1e-12);
        assert!((general_moment(1000, 250.0, 2.0) - (1000.0f64 / 251.0).sqrt()).abs() < 1e-12);
    }
}
