//! The encoding recurrence: x(m) = f(lambda W x(m-1) + Phi a(m) + eta(m)).
//!
//! Reset memories encode a finite sequence from the zero state; buffers
//! stream indefinitely and rely on contraction or saturation to forget.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::codebook::Codebook;
use crate::error::{CoreError, Result};
use crate::operator::RecurrentOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    Linear,
    /// Clip every component to [-kappa, kappa].
    Clipped { kappa: f64 },
    /// f(x) = gamma * tanh(x / gamma).
    Tanh { gamma: f64 },
}

impl Nonlinearity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Nonlinearity::Clipped { kappa } if kappa <= 0.0 => {
                Err(CoreError::InvalidSpec("clipping threshold kappa must be > 0".into()))
            }
            Nonlinearity::Tanh { gamma } if gamma <= 0.0 => {
                Err(CoreError::InvalidSpec("tanh gain gamma must be > 0".into()))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Nonlinearity::Linear => x,
            Nonlinearity::Clipped { kappa } => x.clamp(-kappa, kappa),
            Nonlinearity::Tanh { gamma } => gamma * (x / gamma).tanh(),
        }
    }

    pub fn is_saturating(&self) -> bool {
        !matches!(self, Nonlinearity::Linear)
    }
}

/// One input to the network: a symbol index, an empty slot, or a raw
/// analog vector of dimension D.
#[derive(Debug, Clone, PartialEq)]
pub enum InputEvent {
    Symbol(usize),
    Empty,
    Analog(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct NetworkConfig<'a> {
    pub codebook: &'a Codebook,
    pub operator: &'a RecurrentOperator,
    pub nonlinearity: Nonlinearity,
    /// Variance of the i.i.d. Gaussian neuronal noise added every step.
    pub sigma_eta2: f64,
    /// Probability that a step of a sparse input stream carries a symbol.
    pub p_s: f64,
    /// Steps after which an unforgetting (linear, lambda = 1) stream errors out.
    pub stream_budget: u64,
}

impl<'a> NetworkConfig<'a> {
    pub fn new(codebook: &'a Codebook, operator: &'a RecurrentOperator) -> Self {
        NetworkConfig {
            codebook,
            operator,
            nonlinearity: Nonlinearity::Linear,
            sigma_eta2: 0.0,
            p_s: 1.0,
            stream_budget: 1_000_000,
        }
    }

    pub fn with_nonlinearity(mut self, f: Nonlinearity) -> Self {
        self.nonlinearity = f;
        self
    }

    pub fn with_noise(mut self, sigma_eta2: f64) -> Self {
        self.sigma_eta2 = sigma_eta2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.nonlinearity.validate()?;
        if self.sigma_eta2 < 0.0 {
            return Err(CoreError::InvalidSpec("noise variance must be >= 0".into()));
        }
        if !(self.p_s > 0.0 && self.p_s <= 1.0) {
            return Err(CoreError::InvalidSpec(format!("p_s must be in (0,1], got {}", self.p_s)));
        }
        if self.codebook.n != self.operator.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.codebook.n,
                got: self.operator.n,
            });
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.operator.lambda
    }

    /// True when an infinite stream keeps a bounded state.
    pub fn forgets(&self) -> bool {
        self.operator.lambda < 1.0 || self.nonlinearity.is_saturating()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryState {
    pub x: Vec<f64>,
    pub steps: u64,
}

impl MemoryState {
    pub fn zeros(n: usize) -> MemoryState {
        MemoryState { x: vec![0.0; n], steps: 0 }
    }

    pub fn reset(&mut self) {
        self.x.iter_mut().for_each(|v| *v = 0.0);
        self.steps = 0;
    }
}

/// One update of the recurrence.
pub fn encode_step<R: Rng>(
    state: &mut MemoryState,
    event: &InputEvent,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<()> {
    let n = cfg.codebook.n;
    debug_assert_eq!(state.x.len(), n);

    cfg.operator.step_forward(&mut state.x);
    let lambda = cfg.operator.lambda;
    if lambda != 1.0 {
        for v in state.x.iter_mut() {
            *v *= lambda;
        }
    }

    match event {
        InputEvent::Symbol(d) => {
            if *d >= cfg.codebook.d {
                return Err(CoreError::TokenOutOfRange { token: *d, alphabet: cfg.codebook.d });
            }
            for (v, c) in state.x.iter_mut().zip(cfg.codebook.column(*d)) {
                *v += c;
            }
        }
        InputEvent::Empty => {}
        InputEvent::Analog(a) => {
            if a.len() != cfg.codebook.d {
                return Err(CoreError::DimensionMismatch { expected: cfg.codebook.d, got: a.len() });
            }
            for (d, &coef) in a.iter().enumerate() {
                if coef != 0.0 {
                    for (v, c) in state.x.iter_mut().zip(cfg.codebook.column(d)) {
                        *v += coef * c;
                    }
                }
            }
        }
    }

    if cfg.sigma_eta2 > 0.0 {
        let sd = cfg.sigma_eta2.sqrt();
        for v in state.x.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v += sd * g;
        }
    }

    if cfg.nonlinearity != Nonlinearity::Linear {
        for v in state.x.iter_mut() {
            *v = cfg.nonlinearity.apply(*v);
        }
    }

    state.steps += 1;
    Ok(())
}

/// Encode a finite sequence from the zero state (reset-memory semantics).
pub fn encode_sequence<R: Rng>(
    events: &[InputEvent],
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<MemoryState> {
    let mut state = MemoryState::zeros(cfg.codebook.n);
    for e in events {
        encode_step(&mut state, e, cfg, rng)?;
    }
    Ok(state)
}

/// One buffer step: identical update, never resets, guards against
/// unbounded growth when nothing forgets.
pub fn stream<R: Rng>(
    state: &mut MemoryState,
    event: &InputEvent,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<()> {
    if !cfg.forgets() && state.steps >= cfg.stream_budget {
        return Err(CoreError::StreamBudgetExceeded { budget: cfg.stream_budget });
    }
    encode_step(state, event, cfg, rng)
}

/// Parse a line-oriented event stream: `S <index>` | `E` | `A <v1> <v2> ...`.
pub fn parse_event_stream(text: &str, d: usize) -> Result<Vec<InputEvent>> {
    let mut events = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        let event = match tag {
            "S" => {
                let idx: usize = parts
                    .next()
                    .ok_or_else(|| CoreError::Parse(format!("line {}: S needs an index", lineno + 1)))?
                    .parse()
                    .map_err(|e| CoreError::Parse(format!("line {}: {e}", lineno + 1)))?;
                if idx >= d {
                    return Err(CoreError::TokenOutOfRange { token: idx, alphabet: d });
                }
                InputEvent::Symbol(idx)
            }
            "E" => InputEvent::Empty,
            "A" => {
                let vals: std::result::Result<Vec<f64>, _> = parts.map(str::parse).collect();
                let vals =
                    vals.map_err(|e| CoreError::Parse(format!("line {}: {e}", lineno + 1)))?;
                if vals.len() != d {
                    return Err(CoreError::DimensionMismatch { expected: d, got: vals.len() });
                }
                InputEvent::Analog(vals)
            }
            other => {
                return Err(CoreError::Parse(format!(
                    "line {}: unknown event tag `{other}`",
                    lineno + 1
                )))
            }
        };
        events.push(event);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{CodebookSpec, Family};
    use crate::operator::OperatorKind;
    use crate::rng;

    fn setup(n: usize, d: usize) -> (Codebook, RecurrentOperator) {
        let cb = Codebook::generate(&CodebookSpec::new(Family::Hdc, n, d, 42)).unwrap();
        let op = RecurrentOperator::make(OperatorKind::Permutation, n, 1.0, 42).unwrap();
        (cb, op)
    }

    #[test]
    fn reset_gives_zero_state_idempotently() {
        let (cb, op) = setup(16, 3);
        let cfg = NetworkConfig::new(&cb, &op);
        let mut r = rng::trial_stream(0, 0);
        let events: Vec<_> = (0..5).map(|i| InputEvent::Symbol(i % 3)).collect();
        let mut st = encode_sequence(&events, &cfg, &mut r).unwrap();
        st.reset();
        assert_eq!(st, MemoryState::zeros(16));
        st.reset();
        assert_eq!(st, MemoryState::zeros(16));
    }

    #[test]
    fn empty_event_keeps_zero_state() {
        let (cb, op) = setup(16, 3);
        let cfg = NetworkConfig::new(&cb, &op);
        let mut r = rng::trial_stream(0, 1);
        let st = encode_sequence(&[InputEvent::Empty, InputEvent::Empty], &cfg, &mut r).unwrap();
        assert!(st.x.iter().all(|&v| v == 0.0));
        assert_eq!(st.steps, 2);
    }

    #[test]
    fn single_symbol_is_its_column() {
        let (cb, op) = setup(16, 3);
        let cfg = NetworkConfig::new(&cb, &op);
        let mut r = rng::trial_stream(0, 2);
        let st = encode_sequence(&[InputEvent::Symbol(2)], &cfg, &mut r).unwrap();
        assert_eq!(st.x, cb.column(2).to_vec());
    }

    #[test]
    fn hdc_states_stay_integer() {
        let (cb, op) = setup(32, 4);
        let cfg = NetworkConfig::new(&cb, &op)
            .with_nonlinearity(Nonlinearity::Clipped { kappa: 3.0 });
        let mut r = rng::trial_stream(1, 0);
        let events: Vec<_> = (0..200).map(|i| InputEvent::Symbol(i % 4)).collect();
        let st = encode_sequence(&events, &cfg, &mut r).unwrap();
        assert!(st.x.iter().all(|&v| v.fract() == 0.0 && v.abs() <= 3.0));
    }

    #[test]
    fn determinism_same_seed_bit_identical() {
        let (cb, op) = setup(64, 4);
        let cfg = NetworkConfig::new(&cb, &op).with_noise(0.25);
        let events: Vec<_> = (0..50).map(|i| InputEvent::Symbol(i % 4)).collect();
        let a = encode_sequence(&events, &cfg, &mut rng::trial_stream(9, 7)).unwrap();
        let b = encode_sequence(&events, &cfg, &mut rng::trial_stream(9, 7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stream_equals_reset_encoding_when_unitary() {
        let (cb, op) = setup(32, 4);
        let cfg = NetworkConfig::new(&cb, &op);
        let events: Vec<_> = (0..10).map(|i| InputEvent::Symbol((i * 3) % 4)).collect();
        let enc = encode_sequence(&events, &cfg, &mut rng::trial_stream(3, 0)).unwrap();
        let mut st = MemoryState::zeros(32);
        let mut r = rng::trial_stream(3, 0);
        for e in &events {
            stream(&mut st, e, &cfg, &mut r).unwrap();
        }
        assert_eq!(st, enc);
    }

    #[test]
    fn stream_budget_guards_unforgetting_network() {
        let (cb, op) = setup(16, 3);
        let mut cfg = NetworkConfig::new(&cb, &op);
        cfg.stream_budget = 5;
        let mut st = MemoryState::zeros(16);
        let mut r = rng::trial_stream(4, 0);
        for _ in 0..5 {
            stream(&mut st, &InputEvent::Symbol(0), &cfg, &mut r).unwrap();
        }
        let err = stream(&mut st, &InputEvent::Symbol(0), &cfg, &mut r);
        assert!(matches!(err, Err(CoreError::StreamBudgetExceeded { .. })));
    }

    #[test]
    fn superposition_linearity_of_analog_streams() {
        let (cb, op) = setup(32, 3);
        let cfg = NetworkConfig::new(&cb, &op);
        let s1: Vec<_> = (0..8)
            .map(|i| InputEvent::Analog(vec![i as f64 * 0.1, -0.3, 0.7]))
            .collect();
        let s2: Vec<_> = (0..8)
            .map(|i| InputEvent::Analog(vec![0.5, i as f64 * -0.2, 0.1]))
            .collect();
        let sum: Vec<_> = s1
            .iter()
            .zip(&s2)
            .map(|(a, b)| match (a, b) {
                (InputEvent::Analog(x), InputEvent::Analog(y)) => {
                    InputEvent::Analog(x.iter().zip(y).map(|(p, q)| p + q).collect())
                }
                _ => unreachable!(),
            })
            .collect();
        let mut r = rng::trial_stream(5, 0);
        let e1 = encode_sequence(&s1, &cfg, &mut r).unwrap();
        let e2 = encode_sequence(&s2, &cfg, &mut r).unwrap();
        let es = encode_sequence(&sum, &cfg, &mut r).unwrap();
        for i in 0..32 {
            assert!((e1.x[i] + e2.x[i] - es.x[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn parse_event_lines() {
        let events = parse_event_stream("S 1\nE\nA 0.5 -1.0\n# comment\n", 2).unwrap();
        assert_eq!(
            events,
            vec![
                InputEvent::Symbol(1),
                InputEvent::Empty,
                InputEvent::Analog(vec![0.5, -1.0])
            ]
        );
        assert!(parse_event_stream("S 9", 2).is_err());
        assert!(parse_event_stream("A 1.0", 2).is_err());
        assert!(parse_event_stream("Q", 2).is_err());
    }

    #[test]
    fn analog_wrong_length_errors() {
        let (cb, op) = setup(16, 3);
        let cfg = NetworkConfig::new(&cb, &op);
        let mut r = rng::trial_stream(0, 3);
        let res = encode_sequence(&[InputEvent::Analog(vec![1.0])], &cfg, &mut r);
        assert!(matches!(res, Err(CoreError::DimensionMismatch { .. })));
    }
}
