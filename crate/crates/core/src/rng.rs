//! Deterministic, splittable random streams.
//!
//! All randomness derives from one master seed. Independent consumers
//! (codebook, operator, each Monte Carlo trial) get their own ChaCha
//! stream, so results are reproducible regardless of evaluation order or
//! worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Reserved stream ids; trial streams start at [`TRIAL_BASE`].
pub const CODEBOOK_STREAM: u64 = 0;
pub const OPERATOR_STREAM: u64 = 1;
pub const NOISE_STREAM: u64 = 2;
pub const TRIAL_BASE: u64 = 1 << 20;

/// ChaCha stream `stream` under `master`.
pub fn stream(master: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Stream for Monte Carlo trial `trial`.
pub fn trial_stream(master: u64, trial: u64) -> ChaCha12Rng {
    stream(master, TRIAL_BASE + trial)
}
