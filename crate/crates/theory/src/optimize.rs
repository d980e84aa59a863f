//! One-dimensional capacity optimization over forgetting or task
//! parameters, plus the standard objectives built on the theory.

use crate::accuracy::{p_corr_numeric, AccuracyGrid};
use crate::diffusion::{ClippedDiffusion, MemoryMode};
use crate::error::Result;
use crate::info::{info_item_symbolic, BufferSnr};
use crate::sensitivity;
use crate::timeconst::lambda_from_tau;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamScale {
    /// Golden-section search on the log-transformed parameter.
    LogContinuous,
    /// Exhaustive scan over the integers in the bounds.
    Integer,
}

pub struct Problem<'a> {
    pub eval: Box<dyn Fn(f64) -> f64 + 'a>,
    pub scale: ParamScale,
    pub lo: f64,
    pub hi: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub argmax: f64,
    pub value: f64,
    /// Every (parameter, objective) pair evaluated, in evaluation order.
    pub trace: Vec<(f64, f64)>,
    /// True when the coarse trace was not unimodal and a dense grid ran.
    pub dense_fallback: bool,
}

const COARSE_POINTS: usize = 33;
const DENSE_POINTS: usize = 512;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

pub fn optimize(problem: &Problem) -> Outcome {
    match problem.scale {
        ParamScale::Integer => integer_scan(problem),
        ParamScale::LogContinuous => continuous(problem),
    }
}

fn integer_scan(problem: &Problem) -> Outcome {
    let lo = problem.lo.ceil() as i64;
    let hi = problem.hi.floor() as i64;
    let mut trace = Vec::with_capacity((hi - lo + 1).max(0) as usize);
    let mut best = (lo as f64, f64::NEG_INFINITY);
    for p in lo..=hi {
        let v = (problem.eval)(p as f64);
        trace.push((p as f64, v));
        if v > best.1 {
            best = (p as f64, v);
        }
    }
    Outcome { argmax: best.0, value: best.1, trace, dense_fallback: false }
}

fn continuous(problem: &Problem) -> Outcome {
    let (llo, lhi) = (problem.lo.ln(), problem.hi.ln());
    let coarse: Vec<(f64, f64)> = (0..COARSE_POINTS)
        .map(|i| {
            let x = (llo + (lhi - llo) * i as f64 / (COARSE_POINTS - 1) as f64).exp();
            (x, (problem.eval)(x))
        })
        .collect();
    let mut trace = coarse.clone();
    let (unimodal, best_idx) = check_unimodal(&coarse, 5.0 * problem.tolerance);

    let grid = if unimodal {
        coarse
    } else {
        let dense: Vec<(f64, f64)> = (0..DENSE_POINTS)
            .map(|i| {
                let x = (llo + (lhi - llo) * i as f64 / (DENSE_POINTS - 1) as f64).exp();
                (x, (problem.eval)(x))
            })
            .collect();
        trace.extend(dense.iter().copied());
        dense
    };
    let best_idx = if unimodal {
        best_idx
    } else {
        grid.iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    };

    // golden-section refinement between the bracketing grid neighbours
    let a0 = grid[best_idx.saturating_sub(1)].0.ln();
    let b0 = grid[(best_idx + 1).min(grid.len() - 1)].0.ln();
    let (mut a, mut b) = (a0, b0);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = (problem.eval)(x1.exp());
    let mut f2 = (problem.eval)(x2.exp());
    trace.push((x1.exp(), f1));
    trace.push((x2.exp(), f2));
    while (b - a).abs() > problem.tolerance {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = (problem.eval)(x2.exp());
            trace.push((x2.exp(), f2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = (problem.eval)(x1.exp());
            trace.push((x1.exp(), f1));
        }
    }
    let (argmax, value) = trace
        .iter()
        .copied()
        .max_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    Outcome { argmax, value, trace, dense_fallback: !unimodal }
}

/// Unimodal within slack: non-decreasing to the max, non-increasing after.
fn check_unimodal(points: &[(f64, f64)], slack: f64) -> (bool, usize) {
    let best = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let rising_ok = points[..=best].windows(2).all(|w| w[1].1 >= w[0].1 - slack);
    let falling_ok = points[best..].windows(2).all(|w| w[1].1 <= w[0].1 + slack);
    (rising_ok && falling_ok, best)
}

// --- standard objectives -------------------------------------------------

/// Total retrieved information per neuron of a reset memory with M
/// uniformly random symbols, as a function of M.
pub fn symbolic_reset_capacity_objective(n: usize, d: usize, grid: AccuracyGrid) -> impl Fn(f64) -> f64 {
    move |m: f64| {
        if m < 1.0 {
            return 0.0;
        }
        let s = sensitivity::universal(n, m);
        let p = p_corr_numeric(s, d, grid);
        m * info_item_symbolic(p.max(1.0 / d as f64), d).unwrap_or(0.0) / n as f64
    }
}

/// Total information per neuron of a contracting reset memory (finite M)
/// as a function of lambda; maximized as lambda -> 1.
pub fn contracting_reset_objective(
    n: usize,
    d: usize,
    m: u64,
    grid: AccuracyGrid,
) -> impl Fn(f64) -> f64 {
    move |lambda: f64| {
        let mut total = 0.0;
        for k in 1..=m {
            let s = match sensitivity::contracting_reset(n, m, lambda.min(1.0), k) {
                Ok(s) => s,
                Err(_) => return 0.0,
            };
            total += info_item_symbolic(p_corr_numeric(s, d, grid).max(1.0 / d as f64), d)
                .unwrap_or(0.0);
        }
        total / n as f64
    }
}

/// Total information per neuron of the saturated contracting buffer as a
/// function of lambda. The lookback sum truncates once the channel SNR
/// falls below 1e-6 of its K = 1 value.
pub fn contracting_buffer_objective(n: usize, d: usize, grid: AccuracyGrid) -> impl Fn(f64) -> f64 {
    move |lambda: f64| {
        if !(lambda > 0.0 && lambda < 1.0) {
            return 0.0;
        }
        let s1 = sensitivity::contracting_buffer(n, lambda, 1).unwrap();
        let cutoff = 1e-3 * s1;
        let mut total = 0.0;
        let mut k = 1u64;
        loop {
            let s = sensitivity::contracting_buffer(n, lambda, k).unwrap();
            if s < cutoff {
                break;
            }
            total += info_item_symbolic(p_corr_numeric(s, d, grid).max(1.0 / d as f64), d)
                .unwrap_or(0.0);
            k += 1;
            if k > 50_000_000 {
                break;
            }
        }
        total / n as f64
    }
}

/// Usable horizon of the analog buffer as a function of tau (the quantity
/// whose maximizer the closed-form tau_opt describes).
pub fn analog_buffer_horizon_objective(
    n: usize,
    d: usize,
    r_star: f64,
    noise_over_dv: f64,
) -> impl Fn(f64) -> f64 {
    move |tau: f64| {
        let lambda = lambda_from_tau(tau);
        match BufferSnr::new(n, d, lambda) {
            Ok(b) => b.with_noise(noise_over_dv).usable_horizon(r_star),
            Err(_) => 0.0,
        }
    }
}

/// Usable information per neuron of the analog buffer as a function of tau.
pub fn analog_buffer_usable_objective(
    n: usize,
    d: usize,
    r_star: f64,
    noise_over_dv: f64,
) -> impl Fn(f64) -> f64 {
    move |tau: f64| {
        let lambda = lambda_from_tau(tau);
        match BufferSnr::new(n, d, lambda) {
            Ok(b) => b.with_noise(noise_over_dv).usable_info(r_star) / n as f64,
            Err(_) => 0.0,
        }
    }
}

/// Retrieved information of the clipped HDC buffer, bits per neuron.
pub fn clipped_buffer_info_per_neuron(kappa: i64, n: usize, d: usize, grid: AccuracyGrid) -> Result<f64> {
    let diff = ClippedDiffusion::new(kappa)?;
    // one pass gives s(K) for all K; truncate when the SNR ratio is spent
    let max_k = (60.0 * (kappa * kappa) as f64) as usize + 64;
    let tr = diff.sensitivity_trace(n, MemoryMode::Buffer, max_k);
    let s1 = tr.s[0];
    let mut total = 0.0;
    for &s in &tr.s {
        if s < 1e-3 * s1 {
            break;
        }
        total += info_item_symbolic(p_corr_numeric(s, d, grid).max(1.0 / d as f64), d)
            .unwrap_or(0.0);
    }
    Ok(total / n as f64)
}

/// Ratio of retrieved information to the bits needed to store the state:
/// I_total / (N log2(2 kappa + 1)).
pub fn storage_ratio(kappa: i64, n: usize, d: usize, grid: AccuracyGrid) -> Result<f64> {
    let per_neuron = clipped_buffer_info_per_neuron(kappa, n, d, grid)?;
    Ok(per_neuron / ((2 * kappa + 1) as f64).log2())
}

/// Storage ratio with the network size optimized for the given kappa.
pub fn storage_ratio_optimal_n(kappa: i64, d: usize, grid: AccuracyGrid) -> Result<f64> {
    let mut best: f64 = 0.0;
    let mut n = 100.0f64;
    while n <= 60_000.0 {
        best = best.max(storage_ratio(kappa, n as usize, d, grid)?);
        n *= 1.25;
    }
    Ok(best)
}
