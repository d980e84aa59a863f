//! Retrieval-accuracy integrals and their high-fidelity approximations.
//!
//! The workhorse is the classification integral
//!   p_corr(s) = E_h [ Phi(h + s)^(D-1) ],  h ~ N(0, 1),
//! evaluated by a midpoint rule with exact Gaussian bin masses on a fixed
//! span. Detection adds a rejection threshold; the factorized and
//! exponential-bound approximations give closed forms in the high-fidelity
//! regime together with the inverse "sensitivity laws".

use crate::error::{Result, TheoryError};
use crate::special::{normal_cdf, normal_sf, LN_2};

/// Integration grid: `bins` midpoint cells spanning +-`span` standard
/// deviations of the (standardized) hit distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyGrid {
    pub bins: usize,
    pub span: f64,
}

impl Default for AccuracyGrid {
    fn default() -> Self {
        AccuracyGrid { bins: 2000, span: 8.0 }
    }
}

impl AccuracyGrid {
    pub fn refined(self) -> AccuracyGrid {
        AccuracyGrid { bins: self.bins * 2, ..self }
    }

    /// Integrate E_h[ g(h) ] for h ~ N(0,1) over [lo, span].
    fn integrate(&self, lo: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let hi = self.span;
        if lo >= hi {
            return 0.0;
        }
        let width = (hi - lo) / self.bins as f64;
        let mut sum = 0.0;
        let mut cdf_left = normal_cdf(lo);
        for i in 0..self.bins {
            let right = lo + (i + 1) as f64 * width;
            let cdf_right = normal_cdf(right);
            let mid = lo + (i as f64 + 0.5) * width;
            sum += (cdf_right - cdf_left) * g(mid);
            cdf_left = cdf_right;
        }
        sum
    }
}

/// ln Phi(x)^(D-1) evaluated stably through the upper tail.
#[inline]
fn ln_cdf_pow(x: f64, dm1: f64) -> f64 {
    let q = normal_sf(x);
    if q >= 1.0 {
        return f64::NEG_INFINITY;
    }
    dm1 * (-q).ln_1p()
}

/// Classification accuracy for sensitivity s and alphabet size D.
pub fn p_corr_numeric(s: f64, d: usize, grid: AccuracyGrid) -> f64 {
    assert!(d >= 1, "alphabet size must be >= 1");
    if d == 1 {
        return 1.0;
    }
    if !s.is_finite() {
        return if s > 0.0 { 1.0 } else { 0.0 };
    }
    let dm1 = (d - 1) as f64;
    grid.integrate(-grid.span, |h| ln_cdf_pow(h + s, dm1).exp())
}

pub fn p_corr(s: f64, d: usize) -> f64 {
    p_corr_numeric(s, d, AccuracyGrid::default())
}

/// Finite-M accuracy with family moments (zero-mean codebooks only):
/// the hit variance differs from the distractor variance by the ratio
/// nu = V(x^2)/V(x)^2, rescaling both the slope and the shift.
pub fn p_corr_general(
    n: usize,
    m: u64,
    d: usize,
    hit_variance_ratio: f64,
    mean: f64,
    grid: AccuracyGrid,
) -> Result<f64> {
    if mean != 0.0 {
        return Err(TheoryError::UnsupportedQuery(
            "finite-M moment form assumes zero-mean codebooks".into(),
        ));
    }
    if m == 0 {
        return Err(TheoryError::Domain("need at least one stored item".into()));
    }
    if d == 1 {
        return Ok(1.0);
    }
    let mf = m as f64;
    let denom = mf - 1.0 + hit_variance_ratio;
    if denom <= 0.0 {
        // single stored item with an exact signal term: no crosstalk at all
        return Ok(1.0);
    }
    let scale = (mf / denom).sqrt();
    let shift = (n as f64 / denom).sqrt();
    let dm1 = (d - 1) as f64;
    Ok(grid.integrate(-grid.span, |h| ln_cdf_pow(scale * h + shift, dm1).exp()))
}

/// Detection outcome probabilities at rejection threshold theta (in
/// signal units, stored signal mean = 1) and symbol prior p_s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionAccuracy {
    /// P(correct symbol and above threshold | symbol stored).
    pub hit_rate: f64,
    /// P(all channels below threshold | empty slot).
    pub correct_rejection_rate: f64,
    /// Prior-weighted total accuracy.
    pub accuracy: f64,
}

/// Hit term: same integrand as classification, lower integration bound
/// raised to (theta - 1) s.
pub fn p_hit(s: f64, d: usize, theta: f64, grid: AccuracyGrid) -> f64 {
    let dm1 = (d - 1) as f64;
    let lo = ((theta - 1.0) * s).max(-grid.span);
    grid.integrate(lo, |h| if d == 1 { 1.0 } else { ln_cdf_pow(h + s, dm1).exp() })
}

pub fn p_corr_detection(
    s: f64,
    d: usize,
    theta: f64,
    p_s: f64,
    grid: AccuracyGrid,
) -> DetectionAccuracy {
    let hit = p_hit(s, d, theta, grid);
    let rej = if theta == f64::NEG_INFINITY {
        0.0
    } else {
        (d as f64 * (-normal_sf(theta * s)).ln_1p()).exp()
    };
    DetectionAccuracy {
        hit_rate: hit,
        correct_rejection_rate: rej,
        accuracy: hit * p_s + rej * (1.0 - p_s),
    }
}

/// D = 1 closed form of the detection accuracy (classical signal
/// detection theory).
pub fn detection_d1(s: f64, theta: f64, p_s: f64) -> f64 {
    (1.0 - normal_cdf((theta - 1.0) * s)) * p_s + normal_cdf(theta * s) * (1.0 - p_s)
}

/// D = 2 closed form of the classification accuracy.
pub fn p_corr_d2(s: f64) -> f64 {
    normal_cdf(s / std::f64::consts::SQRT_2)
}

// --- high-fidelity approximations -------------------------------------

pub const CHANG_BETA: f64 = 1.08;

/// alpha for the tight one-term exponential bound at beta = 1.08.
pub fn chang_alpha() -> f64 {
    (2.0 * std::f64::consts::E / std::f64::consts::PI * (CHANG_BETA - 1.0).sqrt() / CHANG_BETA)
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxMethod {
    /// Factorized approximation Phi(s/sqrt2)^(D-1).
    Fa,
    /// FA with the Chernoff-Rubin exponential bound on the tail.
    FaCr,
    /// FA-CR with the local error expansion, linear in D - 1.
    FaCrLee,
    /// FA-LEE with the tighter Chang bound (alpha e^(-beta x^2)).
    Chang,
}

pub fn p_corr_approx(s: f64, d: usize, method: ApproxMethod) -> f64 {
    let dm1 = (d - 1) as f64;
    match method {
        ApproxMethod::Fa => normal_cdf(s / std::f64::consts::SQRT_2).powf(dm1),
        ApproxMethod::FaCr => {
            let tail = 0.5 * (-s * s / 4.0).exp();
            (1.0 - tail).max(0.0).powf(dm1)
        }
        ApproxMethod::FaCrLee => (1.0 - 0.5 * dm1 * (-s * s / 4.0).exp()).clamp(0.0, 1.0),
        ApproxMethod::Chang => {
            let tail = 0.5 * chang_alpha() * (-CHANG_BETA * s * s / 4.0).exp();
            (1.0 - dm1 * tail).clamp(0.0, 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityLaw {
    /// s^2 = 4 [ln(D-1) - ln(2 eps)].
    CrLee,
    /// s^2 = (4/beta) [ln(D-1) - ln(2 eps) + ln alpha], beta = 1.08.
    Chang,
    /// s^2 = 8 ln(D / eps), the bound from the earlier convolution-code
    /// analysis.
    Plate,
}

/// Squared sensitivity needed for error eps = 1 - p_corr under the law.
pub fn sensitivity_law(d: usize, eps: f64, law: SensitivityLaw) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(TheoryError::Domain(format!("eps must be in (0,1), got {eps}")));
    }
    let dm1 = (d - 1) as f64;
    Ok(match law {
        SensitivityLaw::CrLee => 4.0 * (dm1.ln() - (2.0 * eps).ln()),
        SensitivityLaw::Chang => {
            4.0 / CHANG_BETA * (dm1.ln() - (2.0 * eps).ln() + chang_alpha().ln())
        }
        SensitivityLaw::Plate => 8.0 * (d as f64 / eps).ln(),
    })
}

/// High-fidelity capacity estimate in bits per neuron: the retrieved
/// information is about (1 - eps) log2(D) per item and one item costs
/// s^2(eps) neurons; the estimate maximizes the ratio over eps.
pub fn hifi_capacity_estimate(d: usize, law: SensitivityLaw) -> f64 {
    let log2d = (d as f64).log2();
    let mut best: f64 = 0.0;
    let mut eps = 1e-6;
    while eps < 0.5 {
        if let Ok(s2) = sensitivity_law(d, eps, law) {
            if s2 > 0.0 {
                best = best.max((1.0 - eps) * log2d / s2);
            }
        }
        eps *= 1.01;
    }
    best
}

/// D -> infinity limit of the high-fidelity capacity estimate.
pub fn capacity_asymptote(law: SensitivityLaw) -> f64 {
    match law {
        SensitivityLaw::CrLee => 1.0 / (4.0 * LN_2),
        SensitivityLaw::Chang => CHANG_BETA / (4.0 * LN_2),
        SensitivityLaw::Plate => 1.0 / (8.0 * LN_2),
    }
}

// --- all-correct comparisons -------------------------------------------

/// Probability that all M stored tokens read out above threshold and all
/// D - M distractors below it, with independent Gaussian marginals in
/// unit-variance normalization. Requires M <= D (tokens sampled without
/// replacement).
pub fn plate_all_correct(s: f64, d: usize, m: usize, theta: f64) -> Result<f64> {
    if m > d {
        return Err(TheoryError::Domain(format!("all-correct form needs M <= D ({m} > {d})")));
    }
    let hit = normal_cdf((1.0 - theta) * s);
    let rej = normal_cdf(theta * s);
    Ok(hit.powi(m as i32) * rej.powi((d - m) as i32))
}

/// Our framework's analogue: per-item threshold-augmented accuracy raised
/// to the M-th power.
pub fn our_all_correct(s: f64, d: usize, m: usize, theta: f64, grid: AccuracyGrid) -> f64 {
    p_hit(s, d, theta, grid).powi(m as i32)
}
