//! Orthogonal recurrent operators with matrix-free application.
//!
//! Every kind satisfies |Wv| = |v| and supports signed powers, so the
//! readout can undo any number of encoding steps exactly. The contraction
//! factor lambda rides along as a scalar: `apply` realizes (lambda W)^p,
//! `apply_orthogonal` just W^p.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// Cyclic shift by one (single N-cycle, W^N = I).
    Permutation,
    /// Uniform random permutation; cycle time is the lcm of its cycles.
    RandomPermutation,
    /// Circulant matrix of a length-N kernel with unit-modulus spectrum.
    Circulant,
    /// Two half-size circulant blocks acting on the paired complex layout.
    BlockCirculant,
    /// Per-pair complex rotation by random phases (paired layout, even N).
    PhasorDiagonal,
    /// Dense random orthogonal matrix from sign-corrected QR.
    HaarUnitary,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Permutation => "permutation",
            OperatorKind::RandomPermutation => "random-permutation",
            OperatorKind::Circulant => "circulant",
            OperatorKind::BlockCirculant => "block-circulant",
            OperatorKind::PhasorDiagonal => "phasor-diagonal",
            OperatorKind::HaarUnitary => "haar-unitary",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "permutation" => OperatorKind::Permutation,
            "random-permutation" => OperatorKind::RandomPermutation,
            "circulant" => OperatorKind::Circulant,
            "block-circulant" => OperatorKind::BlockCirculant,
            "phasor-diagonal" => OperatorKind::PhasorDiagonal,
            "haar-unitary" => OperatorKind::HaarUnitary,
            other => return Err(CoreError::Parse(format!("unknown operator kind `{other}`"))),
        })
    }
}

/// Circulant application through the FFT. The kernel is built from random
/// phases directly in the spectral domain (conjugate-symmetric, unit
/// modulus), which makes the matrix exactly orthogonal and the kernel
/// exactly unit-norm; an arbitrary unit-norm kernel would not be.
#[derive(Clone)]
struct CirculantBlock {
    size: usize,
    /// Spectrum phases theta_j, so spectrum_j = exp(i theta_j).
    phases: Vec<f64>,
    kernel: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl CirculantBlock {
    fn new(size: usize, rng: &mut ChaCha12Rng) -> CirculantBlock {
        let mut phases = vec![0.0f64; size];
        // conjugate symmetry keeps the kernel real: theta_{N-j} = -theta_j,
        // the DC (and Nyquist for even N) bins get a random sign
        phases[0] = if rng.gen::<bool>() { 0.0 } else { std::f64::consts::PI };
        let half = size / 2;
        if size % 2 == 0 {
            phases[half] = if rng.gen::<bool>() { 0.0 } else { std::f64::consts::PI };
        }
        for j in 1..(size + 1) / 2 {
            let t = rng.gen::<f64>() * std::f64::consts::TAU;
            phases[j] = t;
            phases[size - j] = -t;
        }
        Self::from_phases(size, phases)
    }

    fn from_phases(size: usize, phases: Vec<f64>) -> CirculantBlock {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut buf: Vec<Complex64> =
            phases.iter().map(|&t| Complex64::new(t.cos(), t.sin())).collect();
        inv.process(&mut buf);
        let kernel = buf.iter().map(|c| c.re / size as f64).collect();
        CirculantBlock { size, phases, kernel, fwd, inv }
    }

    /// y = C^power x on one block.
    fn apply(&self, x: &[f64], power: i64, out: &mut [f64]) {
        let n = self.size;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let p = power as f64;
        for (b, &t) in buf.iter_mut().zip(self.phases.iter()) {
            let (s, c) = (p * t).sin_cos();
            *b *= Complex64::new(c, s);
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = b.re * scale;
        }
    }
}

impl std::fmt::Debug for CirculantBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantBlock").field("size", &self.size).finish()
    }
}

#[derive(Debug, Clone)]
enum KindData {
    /// fwd[i] is the source index of destination i: (Wv)[i] = v[fwd[i]].
    Permutation { fwd: Vec<u32>, inv: Vec<u32> },
    Circulant(CirculantBlock),
    BlockCirculant(CirculantBlock),
    PhasorDiagonal { phases: Vec<f64> },
    Dense { w: DMatrix<f64> },
}

#[derive(Debug, Clone)]
pub struct RecurrentOperator {
    pub kind: OperatorKind,
    pub n: usize,
    pub lambda: f64,
    /// Smallest known C > 0 with W^C = I, when applicable.
    pub cycle_hint: Option<u64>,
    data: KindData,
}

impl RecurrentOperator {
    pub fn make(kind: OperatorKind, n: usize, lambda: f64, seed: u64) -> Result<RecurrentOperator> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(CoreError::InvalidSpec(format!("lambda must be in (0,1], got {lambda}")));
        }
        if n < 2 {
            return Err(CoreError::InvalidSpec("operator needs n >= 2".into()));
        }
        let needs_even = matches!(
            kind,
            OperatorKind::PhasorDiagonal | OperatorKind::BlockCirculant
        );
        if needs_even && n % 2 != 0 {
            return Err(CoreError::InvalidSpec(format!("{} needs even n", kind.name())));
        }
        let mut rng = rng::stream(seed, rng::OPERATOR_STREAM);
        let (data, cycle_hint) = match kind {
            OperatorKind::Permutation => {
                // cyclic shift by one: (Wv)[i] = v[i-1]
                let fwd: Vec<u32> = (0..n).map(|i| ((i + n - 1) % n) as u32).collect();
                let inv: Vec<u32> = (0..n).map(|i| ((i + 1) % n) as u32).collect();
                (KindData::Permutation { fwd, inv }, Some(n as u64))
            }
            OperatorKind::RandomPermutation => {
                let mut fwd: Vec<u32> = (0..n as u32).collect();
                fwd.shuffle(&mut rng);
                let mut inv = vec![0u32; n];
                for (i, &s) in fwd.iter().enumerate() {
                    inv[s as usize] = i as u32;
                }
                let cycle = permutation_order(&fwd);
                (KindData::Permutation { fwd, inv }, cycle)
            }
            OperatorKind::Circulant => {
                (KindData::Circulant(CirculantBlock::new(n, &mut rng)), None)
            }
            OperatorKind::BlockCirculant => {
                (KindData::BlockCirculant(CirculantBlock::new(n / 2, &mut rng)), None)
            }
            OperatorKind::PhasorDiagonal => {
                let phases: Vec<f64> =
                    (0..n / 2).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
                (KindData::PhasorDiagonal { phases }, None)
            }
            OperatorKind::HaarUnitary => {
                let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let qr = g.qr();
                let r = qr.r();
                let mut w = qr.q();
                // fold the signs of R's diagonal into Q for Haar uniformity
                for j in 0..n {
                    if r[(j, j)] < 0.0 {
                        for i in 0..n {
                            w[(i, j)] = -w[(i, j)];
                        }
                    }
                }
                (KindData::Dense { w }, None)
            }
        };
        Ok(RecurrentOperator { kind, n, lambda, cycle_hint, data })
    }

    /// Build a permutation operator from an explicit index map (dest <- src).
    pub fn from_permutation(fwd: Vec<u32>, lambda: f64) -> Result<RecurrentOperator> {
        let n = fwd.len();
        let mut inv = vec![0u32; n];
        let mut seen = vec![false; n];
        for (i, &s) in fwd.iter().enumerate() {
            if s as usize >= n || seen[s as usize] {
                return Err(CoreError::InvalidSpec("not a permutation".into()));
            }
            seen[s as usize] = true;
            inv[s as usize] = i as u32;
        }
        let cycle = permutation_order(&fwd);
        Ok(RecurrentOperator {
            kind: OperatorKind::RandomPermutation,
            n,
            lambda,
            cycle_hint: cycle,
            data: KindData::Permutation { fwd, inv },
        })
    }

    /// (lambda W)^power applied to v; negative powers invert exactly.
    pub fn apply(&self, v: &[f64], power: i64) -> Vec<f64> {
        let mut out = self.apply_orthogonal(v, power);
        if self.lambda != 1.0 && power != 0 {
            let scale = self.lambda.powi(power as i32);
            for x in out.iter_mut() {
                *x *= scale;
            }
        }
        out
    }

    /// W^power applied to v (no contraction factor).
    pub fn apply_orthogonal(&self, v: &[f64], power: i64) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "vector length must match operator size");
        if power == 0 {
            return v.to_vec();
        }
        match &self.data {
            KindData::Permutation { fwd, inv } => {
                let mut out = vec![0.0; self.n];
                if power == 1 || power == -1 {
                    let map = if power == 1 { fwd } else { inv };
                    for (i, &s) in map.iter().enumerate() {
                        out[i] = v[s as usize];
                    }
                } else {
                    let map = permutation_power(fwd, inv, power, self.cycle_hint, self.n);
                    for (i, &s) in map.iter().enumerate() {
                        out[i] = v[s as usize];
                    }
                }
                out
            }
            KindData::Circulant(blk) => {
                let mut out = vec![0.0; self.n];
                blk.apply(v, power, &mut out);
                out
            }
            KindData::BlockCirculant(blk) => {
                let half = self.n / 2;
                let mut out = vec![0.0; self.n];
                blk.apply(&v[..half], power, &mut out[..half]);
                blk.apply(&v[half..], power, &mut out[half..]);
                out
            }
            KindData::PhasorDiagonal { phases } => {
                let half = self.n / 2;
                let p = power as f64;
                let mut out = vec![0.0; self.n];
                for (i, &t) in phases.iter().enumerate() {
                    let (s, c) = (p * t).sin_cos();
                    let re = v[i];
                    let im = v[i + half];
                    out[i] = c * re - s * im;
                    out[i + half] = s * re + c * im;
                }
                out
            }
            KindData::Dense { w } => {
                let mut x = DVector::from_column_slice(v);
                let steps = power.unsigned_abs();
                for _ in 0..steps {
                    x = if power > 0 { w * &x } else { w.tr_mul(&x) };
                }
                x.as_slice().to_vec()
            }
        }
    }

    /// One forward step in place where the kind allows it; falls back to
    /// apply_orthogonal otherwise. This is the encoding hot path.
    pub fn step_forward(&self, v: &mut Vec<f64>) {
        match &self.data {
            KindData::Permutation { fwd, .. } => {
                let mut out = vec![0.0; self.n];
                for (i, &s) in fwd.iter().enumerate() {
                    out[i] = v[s as usize];
                }
                *v = out;
            }
            _ => {
                let out = self.apply_orthogonal(v, 1);
                *v = out;
            }
        }
    }

    /// Dense N x N matrix of W, for small-size oracles.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e[j] = 1.0;
            let col = self.apply_orthogonal(&e, 1);
            for i in 0..self.n {
                m[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        m
    }

    /// The circulant kernel (full-size kind only).
    pub fn kernel(&self) -> Option<&[f64]> {
        match &self.data {
            KindData::Circulant(blk) => Some(&blk.kernel),
            _ => None,
        }
    }

    pub fn dense_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.data {
            KindData::Dense { w } => Some(w),
            _ => None,
        }
    }

    pub fn permutation_maps(&self) -> Option<(&[u32], &[u32])> {
        match &self.data {
            KindData::Permutation { fwd, inv } => Some((fwd, inv)),
            _ => None,
        }
    }
}

/// Composed index map for W^power: out[i] = v[map[i]].
fn permutation_power(
    fwd: &[u32],
    inv: &[u32],
    power: i64,
    cycle: Option<u64>,
    n: usize,
) -> Vec<u32> {
    let base = if power > 0 { fwd } else { inv };
    let modulus = cycle.map(|c| c as u128).unwrap_or(u128::MAX);
    let steps = (power.unsigned_abs() as u128 % modulus) as usize;
    // binary exponentiation on the index map
    let mut map: Vec<u32> = (0..n as u32).collect();
    let mut remaining = steps;
    let mut current = base.to_vec();
    while remaining > 0 {
        if remaining & 1 == 1 {
            for m in map.iter_mut() {
                *m = current[*m as usize];
            }
        }
        remaining >>= 1;
        if remaining > 0 {
            let next: Vec<u32> = current.iter().map(|&i| current[i as usize]).collect();
            current = next;
        }
    }
    map
}

/// Order of the permutation (lcm of cycle lengths), None on u64 overflow.
fn permutation_order(fwd: &[u32]) -> Option<u64> {
    let n = fwd.len();
    let mut seen = vec![false; n];
    let mut order: u64 = 1;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len: u64 = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = fwd[i] as usize;
            len += 1;
        }
        order = lcm_u64(order, len)?;
    }
    Some(order)
}

fn lcm_u64(a: u64, b: u64) -> Option<u64> {
    let g = gcd_u64(a, b);
    (a / g).checked_mul(b)
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
