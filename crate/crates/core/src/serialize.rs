//! Versioned CSV dumps for golden tests and cross-implementation diffing.
//!
//! Floats are written with Rust's shortest-roundtrip formatting, so a dump
//! loaded back reproduces the exact same bits.

use std::fmt::Write as _;

use crate::codebook::{Codebook, Family};
use crate::error::{CoreError, Result};
use crate::mmse::ReadoutMatrix;

const CODEBOOK_MAGIC: &str = "# vsamem-codebook v1";

pub fn codebook_to_csv(cb: &Codebook) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{CODEBOOK_MAGIC} family={} n={} d={} sf={} seed={}",
        cb.family.name(),
        cb.n,
        cb.d,
        cb.sparseness,
        cb.seed
    );
    for i in 0..cb.n {
        let row: Vec<String> = (0..cb.d).map(|d| format!("{}", cb.column(d)[i])).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

pub fn codebook_from_csv(text: &str) -> Result<Codebook> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Parse("empty codebook dump".into()))?;
    if !header.starts_with(CODEBOOK_MAGIC) {
        return Err(CoreError::Parse("missing codebook magic/version header".into()));
    }
    let mut family = None;
    let mut n = 0usize;
    let mut d = 0usize;
    let mut sf = 0.0f64;
    let mut seed = 0u64;
    for kv in header.split_whitespace().skip(3) {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| CoreError::Parse(format!("bad header field `{kv}`")))?;
        match key {
            "family" => family = Some(Family::parse(value)?),
            "n" => n = value.parse().map_err(|e| CoreError::Parse(format!("n: {e}")))?,
            "d" => d = value.parse().map_err(|e| CoreError::Parse(format!("d: {e}")))?,
            "sf" => sf = value.parse().map_err(|e| CoreError::Parse(format!("sf: {e}")))?,
            "seed" => seed = value.parse().map_err(|e| CoreError::Parse(format!("seed: {e}")))?,
            other => return Err(CoreError::Parse(format!("unknown header key `{other}`"))),
        }
    }
    let family = family.ok_or_else(|| CoreError::Parse("header missing family".into()))?;
    let mut data = vec![0.0f64; n * d];
    let mut rows = 0usize;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        if rows >= n {
            return Err(CoreError::Parse("too many rows".into()));
        }
        for (j, tok) in line.split(',').enumerate() {
            if j >= d {
                return Err(CoreError::Parse("too many columns".into()));
            }
            data[j * n + rows] =
                tok.parse().map_err(|e| CoreError::Parse(format!("row {rows}: {e}")))?;
        }
        rows += 1;
    }
    if rows != n {
        return Err(CoreError::Parse(format!("expected {n} rows, got {rows}")));
    }
    Ok(Codebook::from_raw(family, n, d, sf, seed, data))
}

/// Row-major dump of a readout matrix (one CSV row per neuron).
pub fn readout_matrix_to_csv(m: &ReadoutMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# vsamem-readout v1 k={} rows={} cols={} residual={}",
        m.k,
        m.v.nrows(),
        m.v.ncols(),
        m.residual
    );
    for i in 0..m.v.nrows() {
        let row: Vec<String> = (0..m.v.ncols()).map(|j| format!("{}", m.v[(i, j)])).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}
