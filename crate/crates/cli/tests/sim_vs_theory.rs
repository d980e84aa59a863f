//! Simulation oracles for the theory layer: Monte Carlo experiments that
//! pin the statistical claims outside the main acceptance suite.

use rand::Rng;
use rand_distr::StandardNormal;

use vsamem::sim::{self, NetSpec, ReadoutCorruption};
use vsamem_core::codebook::Family;
use vsamem_core::engine::{encode_step, InputEvent, MemoryState, NetworkConfig, Nonlinearity};
use vsamem_core::operator::OperatorKind;
use vsamem_core::readout::project;
use vsamem_core::rng;
use vsamem_theory::accuracy::{p_corr_general, p_corr_numeric, AccuracyGrid};
use vsamem_theory::sensitivity;

/// E[h_hit] = 1 under the family normalization c = N E(x^2), all families.
#[test]
fn normalization_unit_signal_for_every_family() {
    let cases = [
        (Family::Hdc, OperatorKind::Permutation),
        (Family::Hrr, OperatorKind::Circulant),
        (Family::Fhrr, OperatorKind::PhasorDiagonal),
        (Family::Fhrr, OperatorKind::BlockCirculant),
        (Family::Mbat, OperatorKind::HaarUnitary),
    ];
    for (family, op_kind) in cases {
        let n = 512;
        let spec = NetSpec::new(family, op_kind, n, 8);
        let op = spec.operator(7);
        let mut sum = 0.0;
        let trials = 400;
        for t in 0..trials {
            let cb = spec.codebook(1000 + t);
            let cfg = NetworkConfig::new(&cb, &op);
            let mut r = rng::trial_stream(5, t);
            let st = vsamem_core::engine::encode_sequence(&[InputEvent::Symbol(3)], &cfg, &mut r)
                .unwrap();
            sum += project(&st.x, &cb)[3];
        }
        let mean = sum / trials as f64;
        assert!(
            (mean - 1.0).abs() < 0.02,
            "{}/{}: signal mean {mean}",
            family.name(),
            op_kind.name()
        );
    }
}

/// Readout statistics at N=1000, M=250, D=27: hit mean 1, sd 1/s with
/// s = 2, both within three standard errors over 10^4 trials.
#[test]
fn readout_moments_match_universal_law() {
    let n = 1000;
    let m = 250;
    let spec = NetSpec::new(Family::Hdc, OperatorKind::Permutation, n, 27);
    let op = spec.operator(11);
    let trials = 10_000u64;
    let mut hits = Vec::with_capacity(trials as usize);
    let seqs = trials.div_ceil(m as u64);
    for si in 0..seqs {
        let cb = spec.codebook(11 ^ (si.wrapping_mul(0x9e3779b97f4a7c15)));
        let cfg = NetworkConfig::new(&cb, &op);
        let mut r = rng::trial_stream(11, si);
        let seq: Vec<usize> = (0..m).map(|_| r.gen_range(0..27)).collect();
        let events: Vec<InputEvent> = seq.iter().map(|&d| InputEvent::Symbol(d)).collect();
        let st = vsamem_core::engine::encode_sequence(&events, &cfg, &mut r).unwrap();
        let mut y = st.x.clone();
        for k in 0..m {
            let h = project(&y, &cb);
            hits.push(h[seq[m - 1 - k]]);
            if k + 1 < m {
                y = op.apply_orthogonal(&y, -1);
            }
        }
    }
    let nt = hits.len() as f64;
    let mean = hits.iter().sum::<f64>() / nt;
    let var = hits.iter().map(|h| (h - mean) * (h - mean)).sum::<f64>() / (nt - 1.0);
    let sd = var.sqrt();
    let s = 2.0;
    let se_mean = (1.0 / s) / nt.sqrt();
    let se_sd = (1.0 / s) / (2.0 * nt).sqrt();
    assert!((mean - 1.0).abs() < 3.0 * se_mean, "mean {mean}");
    assert!((sd - 1.0 / s).abs() < 3.0 * se_sd, "sd {sd}");
}

/// Crosstalk is Gaussian: skewness and excess kurtosis of the distractor
/// readout stay small at N=4000, M=400 over 10^5 samples.
#[test]
fn distractor_readout_is_gaussian() {
    let n = 4000;
    let m = 400;
    let d = 27;
    let spec = NetSpec::new(Family::Hdc, OperatorKind::Permutation, n, d);
    let op = spec.operator(13);
    let mut samples = Vec::with_capacity(100_000);
    let mut si = 0u64;
    while samples.len() < 100_000 {
        let cb = spec.codebook(13 ^ (si.wrapping_mul(0x9e3779b97f4a7c15)));
        let cfg = NetworkConfig::new(&cb, &op);
        let mut r = rng::trial_stream(13, si);
        let seq: Vec<usize> = (0..m).map(|_| r.gen_range(0..d)).collect();
        let events: Vec<InputEvent> = seq.iter().map(|&dd| InputEvent::Symbol(dd)).collect();
        let st = vsamem_core::engine::encode_sequence(&events, &cfg, &mut r).unwrap();
        let mut y = st.x.clone();
        // 16 lookbacks per sequence, distractor channels only
        for k in 0..16 {
            let h = project(&y, &cb);
            let stored = seq[m - 1 - k];
            for (ch, &v) in h.iter().enumerate() {
                if ch != stored {
                    samples.push(v);
                }
            }
            y = op.apply_orthogonal(&y, -1);
        }
        si += 1;
    }
    let nt = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / nt;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nt;
    let sd = var.sqrt();
    let skew = samples.iter().map(|x| ((x - mean) / sd).powi(3)).sum::<f64>() / nt;
    let kurt = samples.iter().map(|x| ((x - mean) / sd).powi(4)).sum::<f64>() / nt - 3.0;
    assert!(skew.abs() < 0.1, "skew {skew}");
    assert!(kurt.abs() < 0.2, "kurtosis {kurt}");
}

/// Accuracy is statistically identical across lookbacks for a unitary
/// reset memory (chi-squared homogeneity at the 1% level).
#[test]
fn k_invariance_of_unitary_reset_memory() {
    let m = 10;
    // N chosen so the accuracy sits away from saturation
    let spec = NetSpec::new(Family::Hdc, OperatorKind::Permutation, 100, 27);
    let by_k = sim::symbolic_reset_accuracy_by_k(&spec, m, 30_000, ReadoutCorruption::None, 17);
    let total_correct: u64 = by_k.iter().map(|c| c.correct).sum();
    let total: u64 = by_k.iter().map(|c| c.total).sum();
    let p = total_correct as f64 / total as f64;
    let mut chi2 = 0.0;
    for c in &by_k {
        let e = p * c.total as f64;
        let o = c.correct as f64;
        chi2 += (o - e) * (o - e) / (e * (1.0 - p));
    }
    // chi-squared with 9 degrees of freedom, 1% critical value
    assert!(chi2 < 21.67, "chi2 {chi2}");
}

/// Finite-M moment correction: HDC at M=100 matches its general-form
/// integral within Monte Carlo tolerance, and so does HRR with its
/// heavier hit variance.
#[test]
fn general_moment_form_matches_simulation() {
    let n = 2000;
    let m = 100;
    let d = 27;
    let grid = AccuracyGrid::default();
    let cases = [
        (Family::Hdc, OperatorKind::Permutation, 0.0),
        (Family::Hrr, OperatorKind::Circulant, 2.0),
    ];
    for (family, op_kind, nu) in cases {
        let spec = NetSpec::new(family, op_kind, n, d);
        let acc = sim::symbolic_reset_accuracy(&spec, m, 10_000, ReadoutCorruption::None, 23);
        let p = p_corr_general(n, m as u64, d, nu, 0.0, grid).unwrap();
        assert!(
            (acc.rate() - p).abs() <= 0.02,
            "{}: sim {} vs general {p}",
            family.name(),
            acc.rate()
        );
    }
}

/// Codebook sparsity leaves the sensitivity unchanged.
#[test]
fn sparse_codebook_keeps_accuracy() {
    let n = 2000;
    let m = 400;
    let mut spec = NetSpec::new(Family::Hdc, OperatorKind::Permutation, n, 27);
    spec.sparseness = 0.5;
    let acc = sim::symbolic_reset_accuracy(&spec, m, 8000, ReadoutCorruption::None, 29);
    let p = p_corr_numeric(sensitivity::universal(n, m as f64), 27, AccuracyGrid::default());
    assert!((acc.rate() - p).abs() <= 0.03, "sparse sim {} vs {p}", acc.rate());
}

/// Contracting stream reaches the stationary component variance
/// V_phi / (1 - lambda^2) within 10%.
#[test]
fn buffer_component_variance_is_bounded() {
    let n = 64;
    let lambda = 0.9;
    let spec = {
        let mut s = NetSpec::new(Family::Hdc, OperatorKind::Permutation, n, 8);
        s.lambda = lambda;
        s
    };
    let cb = spec.codebook(31);
    let op = spec.operator(31);
    let cfg = NetworkConfig::new(&cb, &op);
    let mut r = rng::trial_stream(31, 0);
    let mut st = MemoryState::zeros(n);
    let mut sum_sq = 0.0;
    let mut count = 0.0;
    for step in 0..10_000 {
        let d = r.gen_range(0..8);
        vsamem_core::engine::stream(&mut st, &InputEvent::Symbol(d), &cfg, &mut r).unwrap();
        if step >= 200 {
            sum_sq += st.x.iter().map(|v| v * v).sum::<f64>();
            count += n as f64;
        }
    }
    let measured = sum_sq / count;
    let bound = 1.0 / (1.0 - lambda * lambda);
    assert!((measured - bound).abs() / bound < 0.10, "var {measured} vs {bound}");
}

/// Clipped integer states reach the uniform equilibrium histogram
/// (chi-squared at the 1% level against uniform on {-kappa..kappa}).
/// The histogram pools over fresh codebooks and widely spaced snapshots,
/// so quenched codebook bias self-averages and the samples are close to
/// independent.
#[test]
fn clipped_stream_equilibrium_histogram_is_uniform() {
    let kappa = 3i64;
    let n = 64;
    let d = 27;
    let spec = {
        let mut s = NetSpec::new(Family::Hdc, OperatorKind::Permutation, n, d);
        s.nonlinearity = Nonlinearity::Clipped { kappa: kappa as f64 };
        s
    };
    let op = spec.operator(37);
    let bins = (2 * kappa + 1) as usize;
    let mut hist = vec![0u64; bins];
    let mut samples = 0u64;
    for run in 0..40u64 {
        let cb = spec.codebook(37 ^ run.wrapping_mul(0x9e3779b97f4a7c15));
        let cfg = NetworkConfig::new(&cb, &op).with_nonlinearity(spec.nonlinearity);
        let mut r = rng::trial_stream(37, run);
        let mut st = MemoryState::zeros(n);
        for step in 0..1500usize {
            let sym = r.gen_range(0..d);
            vsamem_core::engine::stream(&mut st, &InputEvent::Symbol(sym), &cfg, &mut r).unwrap();
            if step >= 500 && step % 25 == 0 {
                for &v in st.x.iter().step_by(4) {
                    hist[(v as i64 + kappa) as usize] += 1;
                }
                samples += (n / 4) as u64;
            }
        }
    }
    let expected = samples as f64 / bins as f64;
    let chi2: f64 = hist
        .iter()
        .map(|&o| (o as f64 - expected) * (o as f64 - expected) / expected)
        .sum();
    // 6 degrees of freedom, 1% critical value
    assert!(chi2 < 16.81, "chi2 {chi2}, hist {hist:?}");
}

/// Analog single-item readout: crosstalk variance (D-1)/N per component.
#[test]
fn analog_single_item_crosstalk_variance() {
    let n = 500;
    let d = 10;
    let spec = NetSpec::new(Family::Hdc, OperatorKind::Permutation, n, d);
    let op = spec.operator(41);
    let trials = 3000;
    let mut err_sq = 0.0;
    let mut count = 0.0;
    for t in 0..trials {
        let cb = spec.codebook(41 ^ (t as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let cfg = NetworkConfig::new(&cb, &op);
        let mut r = rng::trial_stream(41, t);
        let a: Vec<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
        let mut st = MemoryState::zeros(n);
        encode_step(&mut st, &InputEvent::Analog(a.clone()), &cfg, &mut r).unwrap();
        let a_hat = project(&st.x, &cb);
        for (x, t) in a_hat.iter().zip(&a) {
            err_sq += (x - t) * (x - t);
            count += 1.0;
        }
    }
    let measured = err_sq / count;
    let predicted = (d - 1) as f64 / n as f64;
    assert!(
        (measured - predicted).abs() / predicted < 0.1,
        "crosstalk var {measured} vs {predicted}"
    );
}

/// MMSE with plenty of training data never loses to the naive readout on
/// a noisy symbolic task.
#[test]
fn mmse_at_least_as_good_as_naive_symbolic() {
    use vsamem_core::mmse::{fit_empirical, FitMode, TrainingTask};
    let n = 500;
    let d = 27;
    let m = 15;
    let spec = {
        let mut s = NetSpec::new(Family::Hrr, OperatorKind::Permutation, n, d);
        s.sigma_eta2 = 2e-4;
        s
    };
    let cb = spec.codebook(43);
    let op = spec.operator(43);
    let cfg = NetworkConfig::new(&cb, &op).with_noise(spec.sigma_eta2);
    let ks: Vec<i64> = (0..m as i64).collect();
    let fitted = fit_empirical(
        &cfg,
        TrainingTask::SymbolicUniform { p_s: 1.0 },
        FitMode::Reset { m },
        &ks,
        4000,
        None,
        43,
    )
    .unwrap();
    for f in &fitted {
        assert!(f.residual <= 1e-8, "residual {}", f.residual);
    }
    let trials = 2000u64;
    let mut naive = vec![0u64; m];
    let mut wiener = vec![0u64; m];
    for t in 0..trials {
        let mut r = rng::trial_stream(91, t);
        let seq: Vec<usize> = (0..m).map(|_| r.gen_range(0..d)).collect();
        let events: Vec<InputEvent> = seq.iter().map(|&dd| InputEvent::Symbol(dd)).collect();
        let st = vsamem_core::engine::encode_sequence(&events, &cfg, &mut r).unwrap();
        for (i, &k) in ks.iter().enumerate() {
            let target = seq[m - 1 - k as usize];
            let y = op.apply_orthogonal(&st.x, -k);
            if vsamem_core::readout::classify_wta(&project(&y, &cb)) == target {
                naive[i] += 1;
            }
            if vsamem_core::readout::classify_wta(&fitted[i].read(&st.x)) == target {
                wiener[i] += 1;
            }
        }
    }
    for k in 0..m {
        let pn = naive[k] as f64 / trials as f64;
        let pw = wiener[k] as f64 / trials as f64;
        // ties allowed; one binomial standard error of slack
        let slack = (pn * (1.0 - pn) / trials as f64).sqrt();
        assert!(pw >= pn - slack, "K={k}: mmse {pw} < naive {pn}");
    }
}

/// The compare harness: |z| < 3 on at least 95% of an M grid.
#[test]
fn compare_grid_z_scores() {
    let spec = NetSpec::new(Family::Hdc, OperatorKind::Permutation, 2000, 27);
    let grid = AccuracyGrid::default();
    let ms = [100usize, 200, 300, 400, 500, 600, 700, 800, 900, 1000];
    let mut within = 0;
    for (i, &m) in ms.iter().enumerate() {
        let count =
            sim::symbolic_reset_accuracy(&spec, m, 2000, ReadoutCorruption::None, 47 + i as u64);
        let p = p_corr_numeric(sensitivity::universal(2000, m as f64), 27, grid);
        if sim::accuracy_z_score(&count, p).abs() < 3.0 {
            within += 1;
        }
    }
    assert!(within * 100 >= ms.len() * 95, "only {within}/{} within 3z", ms.len());
}
