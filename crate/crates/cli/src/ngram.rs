//! Text n-gram statistics in superposition: every n-gram position in the
//! text is encoded as a composite key vector and summed into one state.
//! The count of any n-gram reads back as similarity / c, corrupted by
//! crosstalk from all other accumulated n-grams.

use std::collections::HashMap;

use vsamem_core::algebra::{encode_ngram, similarity};
use vsamem_core::codebook::Codebook;
use vsamem_core::engine::MemoryState;
use vsamem_core::operator::RecurrentOperator;

pub const ALPHABET: usize = 27;

/// Lowercase letters map to 0..25, everything else to the space token 26.
pub fn map_char(c: char) -> u8 {
    let c = c.to_ascii_lowercase();
    if c.is_ascii_lowercase() {
        c as u8 - b'a'
    } else {
        26
    }
}

pub fn map_text(text: &str) -> Vec<u8> {
    text.chars().map(map_char).collect()
}

#[derive(Debug)]
pub struct NgramIngest {
    pub state: MemoryState,
    /// Exact counts per distinct n-gram.
    pub counts: HashMap<Vec<u8>, u64>,
    pub n_order: usize,
}

/// Accumulate all length-`order` windows of the text into one memory
/// state under the identity recurrence, and keep the exact count table.
pub fn ingest(
    text: &str,
    order: usize,
    codebook: &Codebook,
    rho: &RecurrentOperator,
) -> Result<NgramIngest, vsamem_core::CoreError> {
    let tokens = map_text(text);
    if tokens.len() < order || order == 0 {
        return Err(vsamem_core::CoreError::InvalidSpec(format!(
            "text of {} tokens has no {order}-grams",
            tokens.len()
        )));
    }
    let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
    for w in tokens.windows(order) {
        *counts.entry(w.to_vec()).or_insert(0) += 1;
    }
    // the state is sum over distinct grams of count * key
    let mut state = MemoryState::zeros(codebook.n);
    for (gram, &count) in &counts {
        let idx: Vec<usize> = gram.iter().map(|&t| t as usize).collect();
        let key = encode_ngram(&idx, codebook, rho)?;
        let c = count as f64;
        for (s, k) in state.x.iter_mut().zip(&key) {
            *s += c * k;
        }
        state.steps += count;
    }
    Ok(NgramIngest { state, counts, n_order: order })
}

/// Read one n-gram's count estimate back from the state.
pub fn read_count(
    ingest: &NgramIngest,
    gram: &[u8],
    codebook: &Codebook,
    rho: &RecurrentOperator,
) -> Result<f64, vsamem_core::CoreError> {
    let idx: Vec<usize> = gram.iter().map(|&t| t as usize).collect();
    let key = encode_ngram(&idx, codebook, rho)?;
    Ok(similarity(&key, &ingest.state.x, codebook.family) / codebook.normalization())
}

/// Crosstalk variance predicted for the count of `gram`: every other
/// distinct n-gram contributes count^2 / N.
pub fn predicted_count_variance(ingest: &NgramIngest, gram: &[u8], n: usize) -> f64 {
    let own = *ingest.counts.get(gram).unwrap_or(&0) as f64;
    let sum_sq: f64 = ingest.counts.values().map(|&c| (c as f64) * (c as f64)).sum();
    (sum_sq - own * own) / n as f64
}
