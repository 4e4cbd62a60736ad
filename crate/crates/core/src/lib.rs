//! Pragmatic program synthesis over boolean lexicons.
//!
//! The crate computes exact Rational Speech Acts listeners over an
//! utterance × hypothesis consistency matrix and amortizes them into a single
//! example-agnostic ranking of hypotheses. Everything here is pure computation
//! and builds under `no_std` with `alloc`; file formats, timing, parallel
//! drivers and the interactive service live in the `pragrank` crate.
//!
//! Layout:
//!
//! - [`lexicon`]: the consistency matrix, consistent-set queries, random lexicons.
//! - [`rsa`]: literal listener, alternating listener/speaker chains, the
//!   factorized form of a chain, and the incremental multi-utterance listener.
//! - [`ranking`]: global rankings, dataset generation from simulated
//!   speaker/listener exchanges, annealing distillation, cycle diagnostics.
//! - [`neural`]: pairwise-preference score networks and ensembles.
//! - [`domains`]: the binary regex domain and the Animals grid domain.
//! - [`eval`]: replay of utterance traces, success curves, and the ranking
//!   existence / stability experiments.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bitset;
pub mod domains;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod neural;
pub mod order;
pub mod ranking;
pub mod rsa;

pub use bitset::BitSet;
pub use error::{Error, Result};
pub use lexicon::{ConsistentSet, Lexicon};
pub use order::Scored;
pub use ranking::GlobalRanking;
pub use rsa::Prior;
