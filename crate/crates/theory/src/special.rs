//! Small special-function toolkit on top of statrs' error function.

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const LN_2: f64 = std::f64::consts::LN_2;

/// Standard normal cumulative distribution function.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail Q(x) = 1 - Phi(x), accurate far into the tail.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (std::f64::consts::TAU).sqrt()
}

/// ln C(n, k) through the log-gamma function.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Dilogarithm Li2(x) for x <= 1, by series plus standard reflections,
/// absolute accuracy around 1e-12.
pub fn dilog(x: f64) -> f64 {
    const PI2_6: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    if x == 1.0 {
        return PI2_6;
    }
    if x == -1.0 {
        return -PI2_6 / 2.0;
    }
    if x > 1.0 {
        return f64::NAN;
    }
    if x < -1.0 {
        // Li2(x) = -Li2(1/x) - pi^2/6 - ln^2(-x)/2
        let l = (-x).ln();
        return -dilog(1.0 / x) - PI2_6 - 0.5 * l * l;
    }
    if x > 0.5 {
        // Li2(x) + Li2(1-x) = pi^2/6 - ln(x) ln(1-x)
        return PI2_6 - x.ln() * (1.0 - x).ln() - dilog(1.0 - x);
    }
    if x < -0.5 {
        // Li2(x) = -Li2(x/(x-1)) - ln^2(1-x)/2
        let l = (1.0 - x).ln();
        return -dilog(x / (x - 1.0)) - 0.5 * l * l;
    }
    // |x| <= 1/2: the series converges geometrically
    let mut sum = 0.0;
    let mut term = x;
    let mut k = 1u32;
    loop {
        let add = term / (k as f64 * k as f64);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-30) || k > 200 {
            break;
        }
        term *= x;
        k += 1;
    }
    sum
}
