//! Random codebooks for the supported code families.
//!
//! The codebook is the fixed N x D input matrix: column `d` is the
//! hypervector for symbol `d`. Complex (FHRR) codes are stored in a paired
//! real layout: entry `i` is the real part and entry `i + N/2` the
//! imaginary part of complex component `i`.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Bipolar i.i.d. +-1 entries (hyperdimensional computing).
    Hdc,
    /// Gaussian entries with variance 1/N (holographic reduced representation).
    Hrr,
    /// Unit phasors with uniform random phase, complex dimension N/2.
    Fhrr,
    /// Gaussian entries with variance 1/N, bound by a dense random orthogonal matrix.
    Mbat,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Hdc => "hdc",
            Family::Hrr => "hrr",
            Family::Fhrr => "fhrr",
            Family::Mbat => "mbat",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hdc" => Ok(Family::Hdc),
            "hrr" => Ok(Family::Hrr),
            "fhrr" => Ok(Family::Fhrr),
            "mbat" => Ok(Family::Mbat),
            other => Err(CoreError::Parse(format!("unknown code family `{other}`"))),
        }
    }
}

/// Analytic per-component moments of the codebook distribution.
///
/// `hit_variance_ratio` is the dimensionless ratio V(x^2)/V(x)^2 that sets
/// the finite-M correction of the hit variance. For FHRR it is not derived
/// from the real-component moments: the pair coupling makes the signal
/// term |phasor|^2 = 1 exact, so the ratio is 0 like for bipolar codes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeMoments {
    pub mean: f64,
    pub mean_sq: f64,
    pub var: f64,
    pub var_sq: f64,
    pub hit_variance_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct CodebookSpec {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    /// Probability of zeroing an entry (a whole phasor pair for FHRR).
    pub sparseness: f64,
    pub seed: u64,
}

impl CodebookSpec {
    pub fn new(family: Family, n: usize, d: usize, seed: u64) -> Self {
        CodebookSpec { family, n, d, sparseness: 0.0, seed }
    }

    pub fn with_sparseness(mut self, sf: f64) -> Self {
        self.sparseness = sf;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(CoreError::InvalidSpec(format!("n must be >= 2, got {}", self.n)));
        }
        if self.d < 1 {
            return Err(CoreError::InvalidSpec("d must be >= 1".into()));
        }
        if self.family == Family::Fhrr && self.n % 2 != 0 {
            return Err(CoreError::InvalidSpec(format!(
                "fhrr needs even n (complex dimension n/2), got {}",
                self.n
            )));
        }
        if !(0.0..1.0).contains(&self.sparseness) {
            return Err(CoreError::InvalidSpec(format!(
                "sparseness factor must be in [0,1), got {}",
                self.sparseness
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Codebook {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub sparseness: f64,
    pub seed: u64,
    /// Column-major N x D storage.
    data: Vec<f64>,
    pub moments: CodeMoments,
}

impl Codebook {
    /// Deterministically generate a codebook from its spec.
    ///
    /// Columns that come out all-zero after sparsification are redrawn.
    pub fn generate(spec: &CodebookSpec) -> Result<Codebook> {
        spec.validate()?;
        let mut rng = rng::stream(spec.seed, rng::CODEBOOK_STREAM);
        let n = spec.n;
        let mut data = vec![0.0f64; n * spec.d];
        for d in 0..spec.d {
            let col = &mut data[d * n..(d + 1) * n];
            let mut attempts = 0;
            loop {
                fill_column(spec.family, col, &mut rng);
                sparsify(spec.family, col, spec.sparseness, &mut rng);
                if col.iter().any(|&x| x != 0.0) {
                    break;
                }
                attempts += 1;
                if attempts > 100 {
                    return Err(CoreError::InvalidSpec(format!(
                        "column {d} keeps sparsifying to all-zero (sf = {})",
                        spec.sparseness
                    )));
                }
            }
        }
        Ok(Codebook {
            family: spec.family,
            n,
            d: spec.d,
            sparseness: spec.sparseness,
            seed: spec.seed,
            data,
            moments: analytic_moments(spec.family, n, spec.sparseness),
        })
    }

    pub fn column(&self, d: usize) -> &[f64] {
        &self.data[d * self.n..(d + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn raw_data(&self) -> &[f64] {
        &self.data
    }

    pub fn from_raw(
        family: Family,
        n: usize,
        d: usize,
        sparseness: f64,
        seed: u64,
        data: Vec<f64>,
    ) -> Codebook {
        Codebook {
            family,
            n,
            d,
            sparseness,
            seed,
            data,
            moments: analytic_moments(family, n, sparseness),
        }
    }

    /// Readout normalization c = N * E(x^2).
    pub fn normalization(&self) -> f64 {
        self.n as f64 * self.moments.mean_sq
    }
}

fn fill_column(family: Family, col: &mut [f64], rng: &mut ChaCha12Rng) {
    let n = col.len();
    match family {
        Family::Hdc => {
            for x in col.iter_mut() {
                *x = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            }
        }
        Family::Hrr | Family::Mbat => {
            let scale = 1.0 / (n as f64).sqrt();
            for x in col.iter_mut() {
                let g: f64 = rng.sample(StandardNormal);
                *x = g * scale;
            }
        }
        Family::Fhrr => {
            let half = n / 2;
            for i in 0..half {
                let phi = rng.gen::<f64>() * std::f64::consts::TAU;
                col[i] = phi.cos();
                col[i + half] = phi.sin();
            }
        }
    }
}

fn sparsify(family: Family, col: &mut [f64], sf: f64, rng: &mut ChaCha12Rng) {
    if sf == 0.0 {
        return;
    }
    match family {
        Family::Fhrr => {
            let half = col.len() / 2;
            for i in 0..half {
                if rng.gen::<f64>() < sf {
                    col[i] = 0.0;
                    col[i + half] = 0.0;
                }
            }
        }
        _ => {
            for x in col.iter_mut() {
                if rng.gen::<f64>() < sf {
                    *x = 0.0;
                }
            }
        }
    }
}

fn analytic_moments(family: Family, n: usize, sf: f64) -> CodeMoments {
    let keep = 1.0 - sf;
    match family {
        Family::Hdc => CodeMoments {
            mean: 0.0,
            mean_sq: keep,
            var: keep,
            // x^2 is Bernoulli(keep) on {0,1}
            var_sq: sf * keep,
            hit_variance_ratio: if keep > 0.0 { sf / keep } else { 0.0 },
        },
        Family::Hrr | Family::Mbat => {
            let nf = n as f64;
            CodeMoments {
                mean: 0.0,
                mean_sq: keep / nf,
                var: keep / nf,
                // E(x^4) = 3 keep / N^2 for the zeroed Gaussian
                var_sq: keep * (3.0 - keep) / (nf * nf),
                hit_variance_ratio: (2.0 + sf) / keep,
            }
        }
        Family::Fhrr => CodeMoments {
            // per real component of the paired layout
            mean: 0.0,
            mean_sq: 0.5 * keep,
            var: 0.5 * keep,
            var_sq: keep / 8.0 + 0.25 * keep * sf,
            // coupled pairs: the self-product is exactly |phasor|^2
            hit_variance_ratio: if keep > 0.0 { 2.0 * sf / keep } else { 0.0 },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hdc_entries_bipolar_and_deterministic() {
        let spec = CodebookSpec::new(Family::Hdc, 4, 2, 42);
        let cb = Codebook::generate(&spec).unwrap();
        assert!(cb.columns().all(|c| c.iter().all(|&x| x == 1.0 || x == -1.0)));
        let cb2 = Codebook::generate(&spec).unwrap();
        assert_eq!(cb.raw_data(), cb2.raw_data());
        assert_eq!(cb.normalization(), 4.0);
    }

    #[test]
    fn hrr_moments_match_family() {
        let n = 1000;
        let cb = Codebook::generate(&CodebookSpec::new(Family::Hrr, n, 3, 1)).unwrap();
        let m = cb.moments;
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.mean_sq, 1.0 / n as f64);
        assert_eq!(m.var, 1.0 / n as f64);
        // variance of the squared entry, 2/N in units of V(x); the
        // dimensionless hit-variance ratio is the operative constant
        assert!((m.var_sq - 2.0 / (n as f64 * n as f64)).abs() < 1e-18);
        assert_eq!(m.hit_variance_ratio, 2.0);
    }

    #[test]
    fn fhrr_pairs_have_unit_norm() {
        let n = 8;
        let cb = Codebook::generate(&CodebookSpec::new(Family::Fhrr, n, 4, 7)).unwrap();
        for col in cb.columns() {
            for i in 0..n / 2 {
                let norm = col[i] * col[i] + col[i + n / 2] * col[i + n / 2];
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(cb.moments.hit_variance_ratio, 0.0);
    }

    #[test]
    fn empirical_moments_match_analytic() {
        let n = 10_000;
        for family in [Family::Hdc, Family::Hrr, Family::Fhrr] {
            let cb = Codebook::generate(&CodebookSpec::new(family, n, 4, 3)).unwrap();
            let m = cb.moments;
            for col in cb.columns() {
                let mean = col.iter().sum::<f64>() / n as f64;
                let mean_sq = col.iter().map(|x| x * x).sum::<f64>() / n as f64;
                // column mean within 4 sigma, E(x^2) within 5 standard errors
                assert!((mean - m.mean).abs() < 4.0 * (m.var / n as f64).sqrt());
                let se_sq = (m.var_sq / n as f64).sqrt().max(1e-12);
                assert!((mean_sq - m.mean_sq).abs() < 5.0 * se_sq);
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Codebook::generate(&CodebookSpec::new(Family::Fhrr, 7, 1, 0)).is_err());
        assert!(Codebook::generate(&CodebookSpec::new(Family::Hdc, 1, 1, 0)).is_err());
        let sf1 = CodebookSpec::new(Family::Hdc, 8, 1, 0).with_sparseness(1.0);
        assert!(Codebook::generate(&sf1).is_err());
    }

    #[test]
    fn sparse_columns_never_all_zero() {
        let spec = CodebookSpec::new(Family::Hdc, 4, 64, 5).with_sparseness(0.9);
        let cb = Codebook::generate(&spec).unwrap();
        for col in cb.columns() {
            assert!(col.iter().any(|&x| x != 0.0));
        }
    }
}
