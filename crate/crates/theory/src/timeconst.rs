//! Forgetting time constants: the exponential decay scale of the readout
//! sensitivity, lambda = exp(-1/tau). Nonlinear mechanisms are mapped to
//! an equivalent lambda by equating their saturated noise-variance bound
//! to 1/(1 - lambda^2).

use crate::diffusion::TanhDiffusion;
use crate::error::{Result, TheoryError};

/// tau(lambda) = -1 / ln(lambda); infinite for lambda = 1.
pub fn tau_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(TheoryError::Domain(format!("lambda must be in (0,1], got {lambda}")));
    }
    if lambda == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-1.0 / lambda.ln())
}

pub fn lambda_from_tau(tau: f64) -> f64 {
    (-1.0 / tau).exp()
}

/// tau(kappa) = -2 / ln(1 - 3/(kappa (kappa + 1))), about (2/3) kappa^2
/// for large kappa.
pub fn tau_clipped(kappa: f64) -> Result<f64> {
    if kappa < 1.0 {
        return Err(TheoryError::Domain("kappa must be >= 1".into()));
    }
    Ok(-2.0 / (1.0 - 3.0 / (kappa * (kappa + 1.0))).ln())
}

pub fn tau_clipped_approx(kappa: f64) -> f64 {
    2.0 / 3.0 * kappa * kappa
}

/// tau(gamma): estimate the tanh equilibrium variance by diffusion, then
/// equate it to the contracting-weights bound 1/(1 - lambda^2).
pub fn tau_tanh(gamma: f64, bins_half: usize) -> Result<f64> {
    // the bin width must resolve the unit increments regardless of gamma
    let bins = bins_half.max((4.0 * gamma).ceil() as usize);
    let v = TanhDiffusion::new(gamma, bins)?.equilibrium_variance();
    tau_from_variance_bound(v)
}

/// Convert any saturated noise-variance bound to a time constant.
pub fn tau_from_variance_bound(v: f64) -> Result<f64> {
    if v <= 1.0 {
        return Err(TheoryError::Domain(format!(
            "variance bound {v} <= 1 has no contracting equivalent"
        )));
    }
    Ok(-2.0 / (1.0 - 1.0 / v).ln())
}

/// Find the tanh gain whose time constant matches `tau` (bisection;
/// tau(gamma) is increasing in gamma).
pub fn gamma_for_tau(tau: f64, bins_half: usize) -> Result<f64> {
    let (mut lo, mut hi) = (2.0f64, 4096.0f64);
    if tau_tanh(hi, bins_half)? < tau {
        return Err(TheoryError::Solver(format!("tau = {tau} beyond gamma bracket")));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tau_tanh(mid, bins_half)? < tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
