//! Discrete Chapman-Kolmogorov tracking of the readout product term for
//! networks with saturating activation functions.
//!
//! The tracked scalar z is one component's contribution to the readout dot
//! product. Distractor inputs move it by +-1 (bipolar codes); the stored
//! item of interest adds +1 deterministically. The nonlinearity bounds z,
//! so its distribution lives on a finite grid: exact integers for the
//! clipped-linear function, discretized bins for tanh.

use crate::error::{Result, TheoryError};

/// Probability vector over the discretized z domain.
#[derive(Debug, Clone)]
pub struct DiffusionState {
    pub probs: Vec<f64>,
    /// Value represented by bin j.
    pub values: Vec<f64>,
}

impl DiffusionState {
    pub fn mean(&self) -> f64 {
        self.probs.iter().zip(&self.values).map(|(p, v)| p * v).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.probs
            .iter()
            .zip(&self.values)
            .map(|(p, v)| p * (v - mu) * (v - mu))
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Per-lookback sensitivity trace from a diffusion analysis.
#[derive(Debug, Clone)]
pub struct SensitivityTrace {
    /// s(K) for K = 1..=len, already scaled by sqrt(N).
    pub s: Vec<f64>,
    pub final_state: DiffusionState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryMode {
    /// Zero initial state; the stored item arrives after `pre_steps`
    /// distractors.
    Reset { pre_steps: u64 },
    /// Saturated buffer: the exact equilibrium distribution initializes z.
    Buffer,
}

// --- clipped-linear ------------------------------------------------------

/// Integer-state diffusion for the clipped-linear function with bipolar
/// codes: z walks on {-kappa..kappa} with sticky boundaries.
pub struct ClippedDiffusion {
    kappa: i64,
}

impl ClippedDiffusion {
    pub fn new(kappa: i64) -> Result<ClippedDiffusion> {
        if kappa < 1 {
            return Err(TheoryError::Domain("kappa must be a positive integer".into()));
        }
        Ok(ClippedDiffusion { kappa })
    }

    pub fn bins(&self) -> usize {
        (2 * self.kappa + 1) as usize
    }

    fn values(&self) -> Vec<f64> {
        (-self.kappa..=self.kappa).map(|k| k as f64).collect()
    }

    fn delta_at_zero(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.bins()];
        q[self.kappa as usize] = 1.0;
        q
    }

    fn uniform(&self) -> Vec<f64> {
        vec![1.0 / self.bins() as f64; self.bins()]
    }

    /// One distractor step: +-1 with probability 1/2, clipped at the edges.
    pub fn diffuse(&self, q: &[f64]) -> Vec<f64> {
        let nb = self.bins();
        let mut out = vec![0.0; nb];
        for j in 0..nb {
            let p = 0.5 * q[j];
            if j == 0 {
                out[0] += p;
            } else {
                out[j - 1] += p;
            }
            if j == nb - 1 {
                out[nb - 1] += p;
            } else {
                out[j + 1] += p;
            }
        }
        out
    }

    /// The signal step: every component gains +1, clipped at +kappa.
    pub fn skew(&self, q: &[f64]) -> Vec<f64> {
        let nb = self.bins();
        let mut out = vec![0.0; nb];
        for j in 0..nb {
            let dst = (j + 1).min(nb - 1);
            out[dst] += q[j];
        }
        out
    }

    /// Sensitivity trace: initial state per mode, then the signal, then
    /// K - 1 further distractor steps, reading mu/sigma after each.
    pub fn sensitivity_trace(&self, n: usize, mode: MemoryMode, max_k: usize) -> SensitivityTrace {
        let mut q = match mode {
            MemoryMode::Reset { pre_steps } => {
                let mut q = self.delta_at_zero();
                for _ in 0..pre_steps {
                    q = self.diffuse(&q);
                }
                q
            }
            MemoryMode::Buffer => self.uniform(),
        };
        q = self.skew(&q);
        let values = self.values();
        let sqrt_n = (n as f64).sqrt();
        let mut s = Vec::with_capacity(max_k);
        for k in 1..=max_k {
            let st = DiffusionState { probs: q.clone(), values: values.clone() };
            let mu = st.mean();
            let var = st.variance();
            s.push(if var > 0.0 { sqrt_n * mu / var.sqrt() } else { f64::INFINITY });
            if k < max_k {
                q = self.diffuse(&q);
            }
        }
        SensitivityTrace { s, final_state: DiffusionState { probs: q, values } }
    }

    /// Equilibrium variance of the saturated buffer: the uniform
    /// distribution on 2 kappa + 1 integer states.
    pub fn equilibrium_variance(&self) -> f64 {
        let nb = self.bins() as f64;
        (nb * nb - 1.0) / 12.0
    }
}

// --- tanh ---------------------------------------------------------------

/// Discretized diffusion for f(x) = gamma tanh(x / gamma) with bipolar
/// increments. 2n + 1 bins span [-gamma, gamma]; transported mass is split
/// linearly between the two enclosing bins, and the vector is renormalized
/// every step.
pub struct TanhDiffusion {
    gamma: f64,
    n_half: usize,
    values: Vec<f64>,
    up: Vec<(u32, u32, f64)>,
    dn: Vec<(u32, u32, f64)>,
}

impl TanhDiffusion {
    pub fn new(gamma: f64, n_half: usize) -> Result<TanhDiffusion> {
        if gamma <= 0.0 {
            return Err(TheoryError::Domain("gamma must be > 0".into()));
        }
        let width = gamma / n_half as f64;
        if width > gamma / 50.0 {
            return Err(TheoryError::Resolution(format!(
                "bin width {width} above z_max/50; raise the bin count"
            )));
        }
        if width > 0.5 {
            return Err(TheoryError::Resolution(format!(
                "bin width {width} cannot resolve unit increments; raise the bin count"
            )));
        }
        let nb = 2 * n_half + 1;
        let values: Vec<f64> =
            (0..nb).map(|j| (j as f64 - n_half as f64) * width).collect();
        let f = |x: f64| gamma * (x / gamma).tanh();
        let map = |shift: f64| -> Vec<(u32, u32, f64)> {
            values
                .iter()
                .map(|&v| {
                    let pos = f(v + shift) / width + n_half as f64;
                    let lo = pos.floor().clamp(0.0, (nb - 1) as f64);
                    let hi = (lo + 1.0).min((nb - 1) as f64);
                    let frac = (pos - lo).clamp(0.0, 1.0);
                    (lo as u32, hi as u32, frac)
                })
                .collect()
        };
        Ok(TanhDiffusion { gamma, n_half, values: values.clone(), up: map(1.0), dn: map(-1.0) })
    }

    pub fn bins(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn transport(&self, q: &[f64], m: &[(u32, u32, f64)], weight: f64, out: &mut [f64]) {
        for (p, &(lo, hi, frac)) in q.iter().zip(m) {
            let w = weight * p;
            out[lo as usize] += w * (1.0 - frac);
            out[hi as usize] += w * frac;
        }
    }

    pub fn diffuse(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; q.len()];
        self.transport(q, &self.up, 0.5, &mut out);
        self.transport(q, &self.dn, 0.5, &mut out);
        renormalize(&mut out);
        out
    }

    /// Signal step: bipolar codes square to one, so z moves by f(z + 1).
    pub fn skew(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; q.len()];
        self.transport(q, &self.up, 1.0, &mut out);
        renormalize(&mut out);
        out
    }

    fn delta_at_zero(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.bins()];
        q[self.n_half] = 1.0;
        q
    }

    /// Iterate the distractor step to equilibrium; returns the state and
    /// the number of steps taken.
    pub fn equilibrium(&self) -> (Vec<f64>, usize) {
        let mut q = self.delta_at_zero();
        let mut steps = 0;
        loop {
            let next = self.diffuse(&q);
            let delta: f64 = next.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum();
            q = next;
            steps += 1;
            if delta < 1e-13 || steps > 2_000_000 {
                return (q, steps);
            }
        }
    }

    pub fn equilibrium_variance(&self) -> f64 {
        let (q, _) = self.equilibrium();
        DiffusionState { probs: q, values: self.values.clone() }.variance()
    }

    pub fn sensitivity_trace(&self, n: usize, mode: MemoryMode, max_k: usize) -> SensitivityTrace {
        let mut q = match mode {
            MemoryMode::Reset { pre_steps } => {
                let mut q = self.delta_at_zero();
                for _ in 0..pre_steps {
                    q = self.diffuse(&q);
                }
                q
            }
            MemoryMode::Buffer => self.equilibrium().0,
        };
        q = self.skew(&q);
        let sqrt_n = (n as f64).sqrt();
        let mut s = Vec::with_capacity(max_k);
        for k in 1..=max_k {
            let st = DiffusionState { probs: q.clone(), values: self.values.clone() };
            let mu = st.mean();
            let var = st.variance();
            s.push(if var > 0.0 { sqrt_n * mu / var.sqrt() } else { f64::INFINITY });
            if k < max_k {
                q = self.diffuse(&q);
            }
        }
        SensitivityTrace { s, final_state: DiffusionState { probs: q, values: self.values.clone() } }
    }
}

fn renormalize(q: &mut [f64]) {
    let total: f64 = q.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-9, "probability drift {total}");
    if total > 0.0 {
        let inv = 1.0 / total;
        for p in q.iter_mut() {
            *p *= inv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_item_reset_is_a_delta_at_plus_one() {
        let d = ClippedDiffusion::new(5).unwrap();
        let tr = d.sensitivity_trace(100, MemoryMode::Reset { pre_steps: 0 }, 1);
        assert!(tr.s[0].is_infinite());
        let st = &tr.final_state;
        assert!((st.mean() - 1.0).abs() < 1e-15);
        assert!(st.variance() < 1e-15);
    }

    #[test]
    fn probabilities_stay_normalized() {
        let d = ClippedDiffusion::new(3).unwrap();
        let mut q = vec![0.0; d.bins()];
        q[3] = 1.0;
        for _ in 0..500 {
            q = d.diffuse(&q);
            let total: f64 = q.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clipped_equilibrium_is_uniform() {
        let kappa = 4i64;
        let d = ClippedDiffusion::new(kappa).unwrap();
        let mut q = vec![0.0; d.bins()];
        q[kappa as usize] = 1.0;
        // 100 kappa^2 steps reach the uniform equilibrium
        for _ in 0..(100 * kappa * kappa) {
            q = d.diffuse(&q);
        }
        let target = 1.0 / d.bins() as f64;
        // parity alternation averages out over two consecutive steps
        let q2 = d.diffuse(&q);
        for (a, b) in q.iter().zip(&q2) {
            assert!((0.5 * (a + b) - target).abs() < 1e-10);
        }
        let st = DiffusionState {
            probs: vec![target; d.bins()],
            values: (-kappa..=kappa).map(|k| k as f64).collect(),
        };
        assert!((st.variance() - d.equilibrium_variance()).abs() < 1e-12);
        assert!((d.equilibrium_variance() - (81.0 - 1.0) / 12.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_matches_linear_for_huge_gain() {
        // gamma >> sqrt(M): the squashing never engages, so the trace
        // reproduces the linear-network sensitivity sqrt(N/M) at M = K
        let n = 2048;
        let m = 50usize;
        let td = TanhDiffusion::new(512.0, 4096).unwrap();
        let tr = td.sensitivity_trace(n, MemoryMode::Reset { pre_steps: 0 }, m);
        let s = tr.s[m - 1];
        let target = (n as f64 / m as f64).sqrt();
        assert!((s - target).abs() / target < 0.02, "{s} vs {target}");
    }

    #[test]
    fn tanh_equilibrium_variance_is_stable_under_refinement() {
        let v1 = TanhDiffusion::new(64.0, 400).unwrap().equilibrium_variance();
        let v2 = TanhDiffusion::new(64.0, 800).unwrap().equilibrium_variance();
        assert!((v1 - v2).abs() / v2 < 0.01, "{v1} vs {v2}");
    }

    #[test]
    fn tanh_resolution_guard() {
        assert!(TanhDiffusion::new(64.0, 30).is_err());
        assert!(TanhDiffusion::new(1000.0, 800).is_err());
    }
}
