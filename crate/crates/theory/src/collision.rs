//! Retrieval without superposition (M = 1): the only error source is
//! coincidental duplication of bipolar code vectors. With q = 2^-N the
//! pair-collision probability, the number C of *other* vectors colliding
//! with the stored one is Binomial(D - 1, q), and the correct vector wins
//! the C + 1 way tie with probability 1/(C + 1).

use crate::error::{Result, TheoryError};
use crate::special::ln_binomial;

/// Collision-count distribution and the quantities built on it.
#[derive(Debug, Clone)]
pub struct CollisionStats {
    pub n: usize,
    pub d: f64,
    /// ln q with q = 2^-N (kept in logs; q underflows past N ~ 1000).
    pub ln_q: f64,
    /// p_C for C = 0..=support (truncated once the tail is negligible).
    pub p_c: Vec<f64>,
}

/// Past this D the binomial is evaluated in its Poisson((D-1) q) limit,
/// which keeps the log-gamma arithmetic in comfortable ranges; the
/// total-variation error of the approximation is below q at these sizes.
const POISSON_D: f64 = 1e6;

pub fn collision_stats(n: usize, d: f64) -> Result<CollisionStats> {
    if d < 1.0 {
        return Err(TheoryError::Domain("alphabet must have at least one vector".into()));
    }
    let ln_q = -(n as f64) * std::f64::consts::LN_2;
    if d.log2() > n as f64 {
        return Err(TheoryError::Domain(format!(
            "D = {d} exceeds the 2^{n} representable codewords"
        )));
    }
    let others = d - 1.0;
    let rate = if others > 0.0 { (others.ln() + ln_q).exp() } else { 0.0 };
    let poisson = d > POISSON_D;
    let ln_1mq = (-(ln_q.exp())).ln_1p();
    let mut p_c = Vec::new();
    let mut c = 0.0f64;
    let mut cum = 0.0;
    loop {
        let ln_p = if others == 0.0 {
            if c == 0.0 { 0.0 } else { f64::NEG_INFINITY }
        } else if poisson {
            c * rate.ln() - rate - ln_factorial(c)
        } else {
            ln_binomial(others, c) + c * ln_q + (others - c) * ln_1mq
        };
        let p = ln_p.exp();
        p_c.push(p);
        cum += p;
        c += 1.0;
        if (1.0 - cum < 1e-15 && c > rate) || c > others || c > 1e6 {
            break;
        }
    }
    Ok(CollisionStats { n, d, ln_q, p_c })
}

fn ln_factorial(k: f64) -> f64 {
    statrs::function::gamma::ln_gamma(k + 1.0)
}

/// P(correct | M = 1) = sum_C p_C / (C + 1).
pub fn collision_accuracy(n: usize, d: f64) -> Result<f64> {
    let st = collision_stats(n, d)?;
    Ok(st
        .p_c
        .iter()
        .enumerate()
        .map(|(c, p)| p / (c as f64 + 1.0))
        .sum())
}

/// Information retrievable with full knowledge of the collision
/// structure: sum_C p_C log2(p_C D / (C + 1)) bits.
pub fn collision_info(n: usize, d: f64) -> Result<f64> {
    let st = collision_stats(n, d)?;
    let mut total = 0.0;
    for (c, &p) in st.p_c.iter().enumerate() {
        if p > 0.0 {
            total += p * (p * st.d / (c as f64 + 1.0)).log2();
        }
    }
    Ok(total)
}

/// Closed form of the accuracy sum (geometric identity over the binomial),
/// used as an independent check of the truncated series.
pub fn collision_accuracy_closed_form(n: usize, d: f64) -> f64 {
    let ln_q = -(n as f64) * std::f64::consts::LN_2;
    let q = ln_q.exp();
    if q == 0.0 || d <= 1.0 {
        return 1.0;
    }
    (1.0 - (d * (-q).ln_1p()).exp()) / (d * q)
}
