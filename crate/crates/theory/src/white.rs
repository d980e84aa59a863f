//! Annealed-approximation memory curve for normal networks with MMSE
//! readout, for comparison against this crate's buffers.
//!
//! m(K) = lambda^2K q / (1 + lambda^2K q), with q the root of
//! 1 = (1/N) sum_{K>=0} m(K) + sigma^2 q / (1 + lambda^2).

use crate::error::{Result, TheoryError};

fn rhs(q: f64, n: usize, lambda2: f64, sigma2: f64) -> f64 {
    let mut sum = 0.0;
    let mut f = q;
    loop {
        let t = f / (1.0 + f);
        sum += t;
        if t < 1e-18 {
            break;
        }
        f *= lambda2;
    }
    sum / n as f64 + sigma2 * q / (1.0 + lambda2)
}

/// Solve the fixed point for q by bisection on [1e-12, 1e12]; the right
/// hand side is monotone increasing in q.
pub fn white_q(n: usize, lambda: f64, sigma2: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(TheoryError::Domain("annealed curve needs lambda in (0,1)".into()));
    }
    let lambda2 = lambda * lambda;
    let (mut lo, mut hi) = (1e-12f64, 1e12f64);
    if rhs(lo, n, lambda2, sigma2) > 1.0 || rhs(hi, n, lambda2, sigma2) < 1.0 {
        return Err(TheoryError::Solver("no sign change over the q bracket".into()));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if rhs(mid, n, lambda2, sigma2) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-10 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

/// The annealed memory curve m(K) for K = 0..len-1.
pub fn white_annealed_curve(n: usize, lambda: f64, sigma2: f64, len: usize) -> Result<Vec<f64>> {
    let q = white_q(n, lambda, sigma2)?;
    let lambda2 = lambda * lambda;
    let mut out = Vec::with_capacity(len);
    let mut f = q;
    for _ in 0..len {
        out.push(f / (1.0 + f));
        f *= lambda2;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heavy_noise_kills_memory() {
        let m = white_annealed_curve(400, 0.99f64.sqrt(), 1e9, 10).unwrap();
        assert!(m[0] < 1e-6);
    }

    #[test]
    fn reference_parameters_give_sane_curve() {
        let m = white_annealed_curve(400, 0.99f64.sqrt(), 0.01, 600).unwrap();
        assert!(m[0] > 0.0 && m[0] < 1.0);
        // monotone decay to zero
        for w in m.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!(m[599] < m[0] * 0.2);
    }

    #[test]
    fn solver_residual_is_small() {
        let n = 400;
        let lambda = 0.99f64.sqrt();
        let q = white_q(n, lambda, 0.01).unwrap();
        let r = rhs(q, n, lambda * lambda, 0.01);
        assert!((r - 1.0).abs() < 1e-8, "residual {}", r - 1.0);
    }
}
