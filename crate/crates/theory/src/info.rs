//! Information content and memory capacity.
//!
//! Symbolic items carry the Kullback-Leibler divergence between the
//! achieved accuracy and chance; analog coefficients carry the Gaussian
//! channel information (1/2) log2(1 + r). Buffer totals sum a geometric
//! SNR ladder, which the shifted-factorial (q-Pochhammer) product expresses
//! in closed form.

use crate::error::{Result, TheoryError};
use crate::special::{dilog, LN_2};

// --- symbolic ----------------------------------------------------------

/// Mutual information per retrieved item in bits:
/// D_KL(Bernoulli(p_corr) || Bernoulli(1/D)).
pub fn info_item_symbolic(p_corr: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    let chance = 1.0 / df;
    if !(0.0..=1.0 + 1e-12).contains(&p_corr) {
        return Err(TheoryError::Domain(format!("p_corr = {p_corr} outside [0,1]")));
    }
    if p_corr < chance - 1e-12 {
        return Err(TheoryError::Domain(format!(
            "p_corr = {p_corr} below chance 1/{d}; the divergence form does not apply"
        )));
    }
    let p = p_corr.min(1.0).max(chance);
    let t1 = if p > 0.0 { p * (p * df).log2() } else { 0.0 };
    let t2 = if p < 1.0 { (1.0 - p) * (df * (1.0 - p) / (df - 1.0)).log2() } else { 0.0 };
    Ok(t1 + t2)
}

/// Total symbolic information: sum of per-item information over lookbacks,
/// with the per-K sensitivity supplied by the caller. Terms below the
/// floor end the sum (the ladder is monotone decreasing).
pub fn info_total_symbolic(
    d: usize,
    s_of_k: impl Iterator<Item = f64>,
    p_corr_of_s: impl Fn(f64) -> f64,
) -> f64 {
    let mut total = 0.0;
    for s in s_of_k {
        let p = p_corr_of_s(s);
        let item = info_item_symbolic(p, d).unwrap_or(0.0);
        total += item;
        if item < 1e-9 && s < 0.3 {
            break;
        }
    }
    total
}

// --- analog ------------------------------------------------------------

/// Bits per analog coefficient at SNR r.
pub fn info_item_analog(r: f64) -> f64 {
    0.5 * (1.0 + r).log2()
}

/// Input-output correlation from SNR and back; exact inverses.
pub fn rho_from_r(r: f64) -> f64 {
    (r / (r + 1.0)).sqrt()
}

pub fn r_from_rho(rho: f64) -> f64 {
    rho * rho / (1.0 - rho * rho)
}

/// Reset-memory SNR with a unitary recurrence: r = N / (MD - 1), scaled
/// down by neuronal noise via 1 / (1 + sigma^2 / (D V_phi)).
pub fn analog_reset_snr(n: usize, m: u64, d: usize, noise_over_dv: f64) -> f64 {
    n as f64 / ((m * d as u64 - 1) as f64) / (1.0 + noise_over_dv)
}

/// Total information of the analog reset memory, bits.
pub fn analog_reset_total(n: usize, m: u64, d: usize, noise_over_dv: f64) -> f64 {
    let r = analog_reset_snr(n, m, d, noise_over_dv);
    (m * d as u64) as f64 * info_item_analog(r)
}

/// Capacity bound 1 / (2 ln 2 (1 + sigma^2/(D V))) bits per neuron,
/// reached as r -> 0.
pub fn analog_capacity_bound(noise_over_dv: f64) -> f64 {
    1.0 / (2.0 * LN_2 * (1.0 + noise_over_dv))
}

// --- analog buffer -------------------------------------------------------

/// Per-lookback SNR of the contracting buffer (M -> infinity unless
/// `m_finite` caps the stream).
#[derive(Debug, Clone, Copy)]
pub struct BufferSnr {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub noise_over_dv: f64,
    pub m_finite: Option<u64>,
}

impl BufferSnr {
    pub fn new(n: usize, d: usize, lambda: f64) -> Result<BufferSnr> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(TheoryError::Domain(format!(
                "buffer needs lambda in (0,1), got {lambda}"
            )));
        }
        Ok(BufferSnr { n, d, lambda, noise_over_dv: 0.0, m_finite: None })
    }

    pub fn with_noise(mut self, noise_over_dv: f64) -> Self {
        self.noise_over_dv = noise_over_dv;
        self
    }

    pub fn with_finite_m(mut self, m: u64) -> Self {
        self.m_finite = Some(m);
        self
    }

    /// Coefficient b with r(K) = b q^K, q = lambda^2.
    pub fn coefficient(&self) -> f64 {
        let q = self.lambda * self.lambda;
        let closure = match self.m_finite {
            Some(m) => 1.0 - q.powi(m as i32),
            None => 1.0,
        };
        self.n as f64 * (1.0 - q) / (self.d as f64 * closure * (1.0 + self.noise_over_dv))
    }

    pub fn r_of_k(&self, k: u64) -> f64 {
        self.coefficient() * (self.lambda * self.lambda).powi(k as i32)
    }

    /// Total information by direct summation of (D/2) log2(1 + r(K)),
    /// truncated when the relative term drops below 1e-15.
    pub fn total_info_direct(&self) -> f64 {
        let q = self.lambda * self.lambda;
        let b = self.coefficient();
        let mut total = 0.0;
        let mut r = b * q;
        let mut k: u64 = 1;
        loop {
            if let Some(m) = self.m_finite {
                if k > m {
                    break;
                }
            }
            let term = 0.5 * self.d as f64 * (1.0 + r).log2();
            total += term;
            if term < 1e-15 * total.max(1e-300) {
                break;
            }
            r *= q;
            k += 1;
            if k > 100_000_000 {
                break;
            }
        }
        total
    }

    /// Total information through the log q-Pochhammer product
    /// log2 (-b q; q)_M = sum_{j=0}^{M-1} log2(1 + b q^(j+1)).
    pub fn total_info_pochhammer(&self) -> f64 {
        let q = self.lambda * self.lambda;
        let b = self.coefficient();
        0.5 * self.d as f64 * ln_pochhammer_neg(b * q, q, self.m_finite) / LN_2
    }

    /// Usable information: the sum restricted to K with r(K) >= r_star.
    pub fn usable_info(&self, r_star: f64) -> f64 {
        let q = self.lambda * self.lambda;
        let b = self.coefficient();
        let mut total = 0.0;
        let mut r = b * q;
        let mut k: u64 = 1;
        while r >= r_star {
            if let Some(m) = self.m_finite {
                if k > m {
                    break;
                }
            }
            total += 0.5 * self.d as f64 * (1.0 + r).log2();
            r *= q;
            k += 1;
        }
        total
    }

    /// Continuous usable horizon: the largest K with r(K) >= r_star.
    pub fn usable_horizon(&self, r_star: f64) -> f64 {
        let q = self.lambda * self.lambda;
        let b = self.coefficient();
        if b * q < r_star {
            return 0.0;
        }
        (r_star / b).ln() / q.ln()
    }
}

/// ln prod_{j=0}^{M-1} (1 + a q^j) (the q-Pochhammer symbol at -a),
/// truncated at machine precision for infinite M.
pub fn ln_pochhammer_neg(a: f64, q: f64, m: Option<u64>) -> f64 {
    let mut total = 0.0;
    let mut aj = a;
    let mut j: u64 = 0;
    loop {
        if let Some(m) = m {
            if j >= m {
                break;
            }
        }
        let term = aj.ln_1p();
        total += term;
        if term.abs() < 1e-15 * total.abs().max(1e-300) {
            break;
        }
        aj *= q;
        j += 1;
        if j > 100_000_000 {
            break;
        }
    }
    total
}

/// Leading-order asymptotic of ln (a q; q)_inf for small |a q| through the
/// dilogarithm: -(tau/2) Li2(a q) + (1/2) ln(1 - a q), tau = -2/ln q.
pub fn ln_pochhammer_asymptotic(a: f64, q: f64) -> f64 {
    let tau = -2.0 / q.ln();
    let aq = a * q;
    -(tau / 2.0) * dilog(aq) + 0.5 * (1.0 - aq).ln()
}

/// Optimal forgetting time constant for a desired floor SNR r_star:
/// tau_opt / N = 2 / (e D r_star (1 + sigma^2/(D V))). The matching
/// usable horizon is K_star = tau_opt / 2.
pub fn tau_opt(n: usize, d: usize, r_star: f64, noise_over_dv: f64) -> f64 {
    2.0 * n as f64 / (std::f64::consts::E * d as f64 * r_star * (1.0 + noise_over_dv))
}

/// Small-r_star estimate of the usable capacity per neuron through the
/// dilogarithm difference; approaches (1 - 1/e)/(2 ln 2) as r_star -> 0.
pub fn usable_capacity_estimate(n: usize, d: usize, r_star: f64, noise_over_dv: f64) -> f64 {
    let tau = tau_opt(n, d, r_star, noise_over_dv);
    let q = (-2.0 / tau).exp();
    let b = std::f64::consts::E * r_star;
    let k_star = tau / 2.0;
    let df = d as f64;
    df * tau / (4.0 * n as f64 * LN_2) * (dilog(b * q) - dilog(b * q.powf(k_star + 1.0)))
}

/// r_star -> 0 intercept of the usable capacity, bits per neuron.
pub fn usable_capacity_intercept(noise_over_dv: f64) -> f64 {
    (1.0 - (-1.0f64).exp()) / (2.0 * LN_2 * (1.0 + noise_over_dv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_item_bounds() {
        assert!((info_item_symbolic(1.0, 27).unwrap() - (27.0f64).log2()).abs() < 1e-12);
        assert!(info_item_symbolic(1.0 / 27.0, 27).unwrap().abs() < 1e-12);
        assert!(info_item_symbolic(0.01, 27).is_err());
    }

    #[test]
    fn analog_item_anchors() {
        assert!((info_item_analog(1.0) - 0.5).abs() < 1e-15);
        assert!((analog_capacity_bound(0.0) - 0.7213475204444817).abs() < 1e-12);
        // r* = 1 means N = MD and exactly 0.5 bits per neuron
        let n = 1000;
        let total = (n as f64) * info_item_analog(1.0);
        assert_eq!(total / n as f64, 0.5);
    }

    #[test]
    fn rho_r_roundtrip_exact() {
        for r in [0.0, 0.3, 1.0, 5.0, 123.0] {
            let rho = rho_from_r(r);
            assert!((r_from_rho(rho) - r).abs() <= 1e-12 * r.max(1.0));
        }
    }

    #[test]
    fn reset_snr_anchor() {
        assert!((analog_reset_snr(500, 10, 10, 0.0) - 500.0 / 99.0).abs() < 1e-12);
    }

    #[test]
    fn pochhammer_equals_direct_sum() {
        for (lambda, m) in [(0.9, Some(100u64)), (0.999, Some(100_000)), (0.99, None)] {
            let mut b = BufferSnr::new(10_000, 10, lambda).unwrap();
            if let Some(m) = m {
                b = b.with_finite_m(m);
            }
            let direct = b.total_info_direct();
            let poch = b.total_info_pochhammer();
            assert!(
                (direct - poch).abs() <= 1e-9 * direct.max(1.0),
                "lambda={lambda}: {direct} vs {poch}"
            );
        }
    }

    #[test]
    fn tau_opt_anchor() {
        let t = tau_opt(10_000, 10, 1.0, 0.0);
        assert!((t - 735.758882342885).abs() < 1e-9);
    }

    #[test]
    fn horizon_peaks_at_tau_opt() {
        let n = 10_000;
        let d = 10;
        for r_star in [0.5, 1.0, 2.0] {
            let t_formula = tau_opt(n, d, r_star, 0.0);
            let mut best = (0.0, 0.0);
            let mut tau = 50.0f64;
            while tau < 6000.0 {
                let lam = (-1.0 / tau).exp();
                let h = BufferSnr::new(n, d, lam).unwrap().usable_horizon(r_star);
                if h > best.1 {
                    best = (tau, h);
                }
                tau *= 1.002;
            }
            assert!(
                (best.0 - t_formula).abs() / t_formula < 0.1,
                "r*={r_star}: grid {} vs formula {t_formula}",
                best.0
            );
            // K* = tau_opt / 2
            assert!((best.1 - t_formula / 2.0).abs() / (t_formula / 2.0) < 0.05);
        }
    }

    #[test]
    fn usable_capacity_intercept_value() {
        let i = usable_capacity_intercept(0.0);
        assert!((i - 0.45597).abs() < 1e-4);
        // direct sum at small r* approaches it
        let n = 10_000;
        let d = 10;
        let r_star = 1e-3;
        let tau = tau_opt(n, d, r_star, 0.0);
        let lam = (-1.0 / tau).exp();
        let usable = BufferSnr::new(n, d, lam).unwrap().usable_info(r_star) / n as f64;
        assert!((usable - i).abs() < 0.01, "{usable}");
        // and the dilog estimate agrees with the direct sum
        let est = usable_capacity_estimate(n, d, r_star, 0.0);
        assert!((est - usable).abs() < 2e-3, "est {est} vs sum {usable}");
    }

    #[test]
    fn total_capacity_approaches_bound_with_optimized_tau() {
        // tau optimized, D large: max_tau I_total/N within 1% of 0.72135
        let n = 10_000;
        let d = 1000;
        let mut best: f64 = 0.0;
        let mut tau = 100.0f64;
        while tau < 40_000.0 {
            let lam = (-1.0 / tau).exp();
            let total = BufferSnr::new(n, d, lam).unwrap().total_info_direct() / n as f64;
            best = best.max(total);
            tau *= 1.03;
        }
        let bound = analog_capacity_bound(0.0);
        assert!((best - bound).abs() / bound < 0.01, "best {best} vs bound {bound}");
    }

    #[test]
    fn asymptotic_pochhammer_tracks_exact_for_small_argument() {
        let q: f64 = 0.9999;
        let a = 0.01;
        let exact = ln_pochhammer_neg(a * q, q, None);
        // the asymptotic expands ln (a q; q)_inf at -a; flip the sign of a
        let approx = ln_pochhammer_asymptotic(-a, q);
        assert!((exact - approx).abs() < 1e-3 * exact.abs().max(1.0));
    }
}
