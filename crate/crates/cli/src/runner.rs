//! Experiment dispatch: map a validated config onto the engine, readout
//! and theory layers and emit CSV tables.

use anyhow::{anyhow, bail, Context, Result};

use vsamem_core::codebook::Family;

use vsamem_core::mmse::{self, DirectMode, FitMode, TrainingTask};
use vsamem_core::operator::{OperatorKind, RecurrentOperator};
use vsamem_core::readout::{classify_wta, project};
use vsamem_theory::accuracy::AccuracyGrid;
use vsamem_theory::info::BufferSnr;
use vsamem_theory::optimize as opt;
use vsamem_theory::query::{self, NoiseKind, SequenceLength, TheoryQuery};
use vsamem_theory::sensitivity;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::csvout::{config_hash, fmt_f64, CsvTable};
use crate::sim::{self, NetSpec, ReadoutCorruption};

pub struct RunOutput {
    /// Output file stem -> table.
    pub tables: Vec<(String, CsvTable)>,
}

pub fn run(cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<RunOutput> {
    let mut cfg = cfg.clone();
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let tables = match cfg.kind {
        ExperimentKind::Simulate => run_simulate(&cfg)?,
        ExperimentKind::Theory => run_theory(&cfg)?,
        ExperimentKind::Sweep => run_sweep(&cfg)?,
        ExperimentKind::Optimize => run_optimize(&cfg)?,
        ExperimentKind::Mmse => run_mmse(&cfg)?,
        ExperimentKind::Ngram => run_ngram(&cfg)?,
        ExperimentKind::Compare => run_compare(&cfg)?,
    };
    Ok(RunOutput { tables })
}

fn net_spec(cfg: &ExperimentConfig) -> Result<NetSpec> {
    let family = cfg.family()?;
    let op_kind = cfg.operator_kind()?;
    let mut spec = NetSpec::new(family, op_kind, cfg.network.n, cfg.network.d);
    spec.lambda = cfg.network.lambda;
    spec.nonlinearity = cfg.nonlinearity()?;
    spec.sigma_eta2 = cfg.network.sigma_eta2;
    spec.sparseness = cfg.network.sparseness;
    Ok(spec)
}

fn base_table(cfg: &ExperimentConfig, columns: &[&str]) -> CsvTable {
    let mut t = CsvTable::new(columns);
    t.meta("seed", cfg.seed);
    t.meta("config_hash", config_hash(&cfg.to_json()));
    t
}

fn theory_query(cfg: &ExperimentConfig, k: u64) -> TheoryQuery {
    let family = cfg.family().unwrap_or(Family::Hdc);
    let moments_ratio = match family {
        Family::Hdc | Family::Fhrr => 0.0,
        Family::Hrr | Family::Mbat => 2.0,
    };
    let var_phi = match family {
        Family::Hdc => 1.0,
        Family::Fhrr => 0.5,
        Family::Hrr | Family::Mbat => 1.0 / cfg.network.n as f64,
    };
    TheoryQuery {
        n: cfg.network.n,
        d: cfg.network.d,
        m: if cfg.task.burn_in > 0 {
            SequenceLength::Infinite
        } else {
            SequenceLength::Finite(cfg.task.m as u64)
        },
        k,
        lambda: cfg.network.lambda,
        sigma_eta2: cfg.network.sigma_eta2,
        noise: if cfg.network.sigma_eta2 > 0.0 { NoiseKind::Encoding } else { NoiseKind::None },
        p_f: 0.0,
        p_s: cfg.network.p_s,
        var_phi,
        hit_variance_ratio: moments_ratio,
        mean_phi: 0.0,
    }
}

fn k_list(cfg: &ExperimentConfig) -> Vec<usize> {
    if !cfg.task.k_set.is_empty() {
        cfg.task.k_set.clone()
    } else if cfg.task.burn_in > 0 {
        vec![1, 2, 5, 10, 20, 50, 100]
    } else {
        (1..=cfg.task.m.min(32)).collect()
    }
}

fn run_simulate(cfg: &ExperimentConfig) -> Result<Vec<(String, CsvTable)>> {
    let spec = net_spec(cfg)?;
    let mut t = base_table(cfg, &["k", "trials", "correct", "accuracy", "se"]);
    match (cfg.task.kind.as_str(), cfg.task.burn_in > 0) {
        ("symbolic", false) => {
            if cfg.trials == 0 {
                return Ok(vec![("simulate".into(), t)]);
            }
            let by_k = sim::symbolic_reset_accuracy_by_k(
                &spec,
                cfg.task.m,
                cfg.trials,
                ReadoutCorruption::None,
                cfg.seed,
            );
            for (k, c) in by_k.iter().enumerate() {
                t.row(vec![
                    k.to_string(),
                    c.total.to_string(),
                    c.correct.to_string(),
                    fmt_f64(c.rate()),
                    fmt_f64(c.standard_error()),
                ]);
            }
        }
        ("symbolic", true) => {
            if cfg.trials == 0 {
                return Ok(vec![("simulate".into(), t)]);
            }
            let counts = sim::symbolic_buffer_accuracy(
                &spec,
                cfg.task.burn_in,
                cfg.task.window.max(cfg.trials as usize),
                &k_list(cfg),
                cfg.seed,
            );
            for (k, c) in counts {
                t.row(vec![
                    k.to_string(),
                    c.total.to_string(),
                    c.correct.to_string(),
                    fmt_f64(c.rate()),
                    fmt_f64(c.standard_error()),
                ]);
            }
        }
        ("analog", _) => {
            let mut t = base_table(cfg, &["k", "trials", "snr", "rho"]);
            if cfg.trials == 0 {
                return Ok(vec![("simulate".into(), t)]);
            }
            for &k in &k_list(cfg) {
                if k >= cfg.task.m {
                    continue;
                }
                let snr = sim::analog_reset_snr_sim(&spec, cfg.task.m, k, cfg.trials, cfg.seed);
                t.row(vec![
                    k.to_string(),
                    cfg.trials.to_string(),
                    fmt_f64(snr),
                    fmt_f64((snr / (snr + 1.0)).sqrt()),
                ]);
            }
            return Ok(vec![("simulate".into(), t)]);
        }
        (other, _) => bail!("unknown task kind `{other}`"),
    }
    Ok(vec![("simulate".into(), t)])
}

fn run_theory(cfg: &ExperimentConfig) -> Result<Vec<(String, CsvTable)>> {
    let mut t = base_table(cfg, &["query_hash", "k", "s", "p_corr", "r", "i_item", "i_total"]);
    let hash = config_hash(&cfg.to_json());
    let grid = AccuracyGrid::default();
    if cfg.task.kind == "analog" {
        let mut t = base_table(cfg, &["query_hash", "k", "r", "rho", "i_item", "i_total"]);
        let noise_ratio = cfg.network.sigma_eta2
            / (cfg.network.d as f64 * family_var(cfg.family()?, cfg.network.n));
        if cfg.task.burn_in > 0 {
            let b = BufferSnr::new(cfg.network.n, cfg.network.d, cfg.network.lambda)
                .map_err(|e| anyhow!("{e}"))?
                .with_noise(noise_ratio);
            let total = b.total_info_direct();
            for &k in &k_list(cfg) {
                let r = b.r_of_k(k as u64);
                t.row(vec![
                    hash.clone(),
                    k.to_string(),
                    fmt_f64(r),
                    fmt_f64(vsamem_theory::info::rho_from_r(r)),
                    fmt_f64(vsamem_theory::info::info_item_analog(r)),
                    fmt_f64(total),
                ]);
            }
        } else {
            let r = vsamem_theory::info::analog_reset_snr(
                cfg.network.n,
                cfg.task.m as u64,
                cfg.network.d,
                noise_ratio,
            );
            let total = vsamem_theory::info::analog_reset_total(
                cfg.network.n,
                cfg.task.m as u64,
                cfg.network.d,
                noise_ratio,
            );
            t.row(vec![
                hash,
                "1".into(),
                fmt_f64(r),
                fmt_f64(vsamem_theory::info::rho_from_r(r)),
                fmt_f64(vsamem_theory::info::info_item_analog(r)),
                fmt_f64(total),
            ]);
        }
        return Ok(vec![("theory".into(), t)]);
    }
    for &k in &k_list(cfg) {
        let q = theory_query(cfg, k as u64);
        let res = query::evaluate(&q, grid).map_err(|e| anyhow!("{e}"))?;
        t.row(vec![
            hash.clone(),
            k.to_string(),
            fmt_f64(res.s),
            fmt_f64(res.p_corr),
            fmt_f64(res.r),
            fmt_f64(res.i_item),
            fmt_f64(res.i_total),
        ]);
    }
    Ok(vec![("theory".into(), t)])
}

fn family_var(family: Family, n: usize) -> f64 {
    match family {
        Family::Hdc => 1.0,
        Family::Fhrr => 0.5,
        Family::Hrr | Family::Mbat => 1.0 / n as f64,
    }
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<(String, CsvTable)>> {
    let sweep = cfg.sweep.as_ref().expect("validated");
    let grid = AccuracyGrid::default();
    let mut t = base_table(cfg, &["parameter", "value", "s", "p_corr", "i_total_per_neuron"]);
    for &v in &sweep.values {
        let (s, p, info) = match sweep.parameter.as_str() {
            "m" => {
                let s = sensitivity::universal(cfg.network.n, v);
                let p = vsamem_theory::p_corr_numeric(s, cfg.network.d, grid);
                let item = vsamem_theory::info::info_item_symbolic(
                    p.max(1.0 / cfg.network.d as f64),
                    cfg.network.d,
                )
                .map_err(|e| anyhow!("{e}"))?;
                (s, p, v * item / cfg.network.n as f64)
            }
            "lambda" => {
                let obj = opt::contracting_buffer_objective(cfg.network.n, cfg.network.d, grid);
                let s = sensitivity::contracting_buffer(cfg.network.n, v, 1)
                    .map_err(|e| anyhow!("{e}"))?;
                let p = vsamem_theory::p_corr_numeric(s, cfg.network.d, grid);
                (s, p, obj(v))
            }
            "kappa" => {
                let info =
                    opt::clipped_buffer_info_per_neuron(v as i64, cfg.network.n, cfg.network.d, grid)
                        .map_err(|e| anyhow!("{e}"))?;
                (f64::NAN, f64::NAN, info)
            }
            other => bail!("unsupported sweep parameter `{other}`"),
        };
        t.row(vec![
            sweep.parameter.clone(),
            fmt_f64(v),
            fmt_f64(s),
            fmt_f64(p),
            fmt_f64(info),
        ]);
    }
    Ok(vec![("sweep".into(), t)])
}

fn run_optimize(cfg: &ExperimentConfig) -> Result<Vec<(String, CsvTable)>> {
    let section = cfg.optimize.as_ref().expect("validated");
    let grid = AccuracyGrid::default();
    let n = cfg.network.n;
    let d = cfg.network.d;
    let scale = match section.parameter.as_str() {
        "m" | "kappa" => opt::ParamScale::Integer,
        "lambda" | "tau" | "gamma" => opt::ParamScale::LogContinuous,
        other => bail!("unsupported free parameter `{other}`"),
    };
    let eval: Box<dyn Fn(f64) -> f64> =
        match (section.objective.as_str(), section.parameter.as_str()) {
            ("total-info", "m") => Box::new(opt::symbolic_reset_capacity_objective(n, d, grid)),
            ("total-info", "lambda") => {
                if cfg.task.burn_in > 0 {
                    Box::new(opt::contracting_buffer_objective(n, d, grid))
                } else {
                    Box::new(opt::contracting_reset_objective(n, d, cfg.task.m as u64, grid))
                }
            }
            ("total-info", "kappa") => Box::new(move |k: f64| {
                opt::clipped_buffer_info_per_neuron(k as i64, n, d, grid).unwrap_or(0.0)
            }),
            ("usable-info", "tau") => {
                Box::new(opt::analog_buffer_usable_objective(n, d, section.r_star, 0.0))
            }
            ("usable-horizon", "tau") => {
                Box::new(opt::analog_buffer_horizon_objective(n, d, section.r_star, 0.0))
            }
            ("storage-ratio", "kappa") => Box::new(move |k: f64| {
                opt::storage_ratio(k as i64, n, d, grid).unwrap_or(0.0)
            }),
            (obj, p) => bail!("unsupported objective/parameter pair `{obj}`/`{p}`"),
        };
    let problem = opt::Problem {
        eval,
        scale,
        lo: section.lo,
        hi: section.hi,
        tolerance: section.tolerance,
    };
    let outcome = opt::optimize(&problem);
    let mut t = base_table(cfg, &["parameter", "objective"]);
    t.meta("argmax", fmt_f64(outcome.argmax));
    t.meta("value", fmt_f64(outcome.value));
    t.meta("dense_fallback", outcome.dense_fallback);
    for (x, v) in &outcome.trace {
        t.row(vec![fmt_f64(*x), fmt_f64(*v)]);
    }
    Ok(vec![("optimize".into(), t)])
}

fn run_mmse(cfg: &ExperimentConfig) -> Result<Vec<(String, CsvTable)>> {
    let spec = net_spec(cfg)?;
    let m = cfg.task.m;
    let ks: Vec<i64> = k_list(cfg).iter().map(|&k| k as i64).filter(|&k| (k as usize) < m).collect();
    let cb = spec.codebook(cfg.seed);
    let op = spec.operator(cfg.seed);
    let net = vsamem_core::engine::NetworkConfig::new(&cb, &op)
        .with_nonlinearity(spec.nonlinearity)
        .with_noise(spec.sigma_eta2);
    let task = if cfg.task.kind == "analog" {
        TrainingTask::AnalogGaussian
    } else {
        TrainingTask::SymbolicUniform { p_s: cfg.network.p_s }
    };
    let ridge = if cfg.readout.ridge < 0.0 { None } else { Some(cfg.readout.ridge) };
    let fitted = match cfg.readout.kind.as_str() {
        "mmse-empirical" => mmse::fit_empirical(
            &net,
            task,
            FitMode::Reset { m },
            &ks,
            cfg.readout.sequences,
            ridge,
            cfg.seed,
        )
        .map_err(|e| anyhow!("{e}"))?,
        "mmse-direct" => mmse::direct(
            &cb,
            &op,
            spec.sigma_eta2,
            DirectMode::Reset { m },
            &ks,
            ridge,
        )
        .map_err(|e| anyhow!("{e}"))?,
        other => bail!("mmse experiment needs an mmse readout kind, got `{other}`"),
    };

    // score naive and fitted side by side on fresh evaluation sequences
    let mut t = base_table(cfg, &["k", "trials", "naive_accuracy", "mmse_accuracy", "residual"]);
    let eval_trials = cfg.trials.max(1);
    let mut naive = vec![sim::AccuracyCount::default(); ks.len()];
    let mut fitted_acc = vec![sim::AccuracyCount::default(); ks.len()];
    for trial in 0..eval_trials {
        let mut trng = vsamem_core::rng::trial_stream(cfg.seed ^ 0xe7a1, 1_000_000 + trial);
        let mut st = vsamem_core::engine::MemoryState::zeros(spec.n);
        let mut seq = Vec::with_capacity(m);
        for _ in 0..m {
            let d = rand::Rng::gen_range(&mut trng, 0..spec.d);
            seq.push(d);
            vsamem_core::engine::encode_step(
                &mut st,
                &vsamem_core::engine::InputEvent::Symbol(d),
                &net,
                &mut trng,
            )
            .map_err(|e| anyhow!("{e}"))?;
        }
        for (i, &k) in ks.iter().enumerate() {
            let target = seq[m - 1 - k as usize];
            let y = op.apply_orthogonal(&st.x, -k);
            if classify_wta(&project(&y, &cb)) == target {
                naive[i].correct += 1;
            }
            naive[i].total += 1;
            if classify_wta(&fitted[i].read(&st.x)) == target {
                fitted_acc[i].correct += 1;
            }
            fitted_acc[i].total += 1;
        }
    }
    for (i, &k) in ks.iter().enumerate() {
        t.row(vec![
            k.to_string(),
            eval_trials.to_string(),
            fmt_f64(naive[i].rate()),
            fmt_f64(fitted_acc[i].rate()),
            fmt_f64(fitted[i].residual),
        ]);
    }
    Ok(vec![("mmse".into(), t)])
}

fn run_ngram(cfg: &ExperimentConfig) -> Result<Vec<(String, CsvTable)>> {
    let section = cfg.ngram.as_ref().expect("validated");
    let text = std::fs::read_to_string(&section.text_file)
        .with_context(|| format!("reading {}", section.text_file))?;
    let spec = net_spec(cfg)?;
    if spec.d != crate::ngram::ALPHABET {
        bail!("ngram experiments use the {} letter alphabet; set network.d accordingly", crate::ngram::ALPHABET);
    }
    let cb = spec.codebook(cfg.seed);
    let rho = RecurrentOperator::make(OperatorKind::Permutation, spec.n, 1.0, cfg.seed)
        .map_err(|e| anyhow!("{e}"))?;
    let ing = crate::ngram::ingest(&text, section.order, &cb, &rho).map_err(|e| anyhow!("{e}"))?;
    let mut grams: Vec<&Vec<u8>> = ing.counts.keys().collect();
    grams.sort();
    let mut t = base_table(cfg, &["gram", "count", "readback", "error", "predicted_sd"]);
    t.meta("distinct_grams", ing.counts.len());
    t.meta("positions", ing.state.steps);
    let mut mse = 0.0;
    let mut pred = 0.0;
    for gram in &grams {
        let count = ing.counts[*gram] as f64;
        let readback = crate::ngram::read_count(&ing, gram, &cb, &rho).map_err(|e| anyhow!("{e}"))?;
        let var = crate::ngram::predicted_count_variance(&ing, gram, spec.n);
        mse += (readback - count) * (readback - count);
        pred += var;
        let label: String = gram
            .iter()
            .map(|&c| if c == 26 { '_' } else { (b'a' + c) as char })
            .collect();
        t.row(vec![
            label,
            fmt_f64(count),
            fmt_f64(readback),
            fmt_f64(readback - count),
            fmt_f64(var.sqrt()),
        ]);
    }
    let g = grams.len() as f64;
    t.meta("measured_mse", fmt_f64(mse / g));
    t.meta("predicted_mse", fmt_f64(pred / g));
    Ok(vec![("ngram".into(), t)])
}

fn run_compare(cfg: &ExperimentConfig) -> Result<Vec<(String, CsvTable)>> {
    let spec = net_spec(cfg)?;
    let grid = AccuracyGrid::default();
    let values: Vec<f64> = match &cfg.sweep {
        Some(s) if s.parameter == "m" => s.values.clone(),
        _ => vec![cfg.task.m as f64],
    };
    let mut t = base_table(
        cfg,
        &["m", "trials", "sim_accuracy", "theory_p_corr", "z"],
    );
    let mut within = 0usize;
    for &mv in &values {
        let m = mv as usize;
        let count = sim::symbolic_reset_accuracy(
            &spec,
            m,
            cfg.trials,
            ReadoutCorruption::None,
            cfg.seed,
        );
        let s = sensitivity::universal(spec.n, m as f64);
        let p = vsamem_theory::p_corr_numeric(s, spec.d, grid);
        let z = sim::accuracy_z_score(&count, p);
        if z.abs() < 3.0 {
            within += 1;
        }
        t.row(vec![
            m.to_string(),
            count.total.to_string(),
            fmt_f64(count.rate()),
            fmt_f64(p),
            fmt_f64(z),
        ]);
    }
    t.meta("fraction_within_3z", fmt_f64(within as f64 / values.len() as f64));
    Ok(vec![("compare".into(), t)])
}
