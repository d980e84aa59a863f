//! Distributed sequence memories built on vector-symbolic codebooks.
//!
//! A random codebook projects symbols (or analog vectors) into an
//! N-dimensional state, an orthogonal recurrence time-stamps them, and a
//! linear readout recovers items from the superposition. This crate holds
//! the data plane: codebook generation, matrix-free orthogonal operators,
//! the binding/permutation/similarity algebra, the encoding engine for
//! reset memories and forgetful buffers, and both the naive and the
//! Wiener-filter (MMSE) readouts.

pub mod algebra;
pub mod codebook;
pub mod engine;
pub mod error;
pub mod mmse;
pub mod operator;
pub mod readout;
pub mod rng;
pub mod serialize;

pub use codebook::{Codebook, CodebookSpec, CodeMoments, Family};
pub use engine::{InputEvent, MemoryState, NetworkConfig, Nonlinearity};
pub use error::CoreError;
pub use operator::{OperatorKind, RecurrentOperator};
pub use readout::{classify_wta, detect, vsa_linear_readout, Detection, DetectionParams};
