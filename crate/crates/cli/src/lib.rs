//! Experiment harness for distributed sequence memories: declarative
//! configs, simulation-vs-theory sweeps, MMSE fitting, n-gram ingestion
//! and deterministic CSV emission.

pub mod config;
pub mod csvout;
pub mod ngram;
pub mod runner;
pub mod sim;
