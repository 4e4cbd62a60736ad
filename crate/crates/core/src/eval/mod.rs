//! Replay evaluation, timing, and the ranking-existence and stability
//! experiments.

mod listener;
mod replay;
mod theory;

pub use listener::{ExactL1, Listener, ListenerSession, RankListener};
pub use replay::{
    bootstrap_mean_ci, replay, replay_all_turns, simulate_traces, success_curve, timing_table, CurvePoint, ReplayTrace,
    TimingRow, TraceTag, Turn, TurnResult,
};
pub use theory::{
    check_lexicon_exists, child_seed, exists_lexicon, exp_ranking_exists, exp_stability, frac_stable, stability_sample,
    ExistsConfig, ExistsReport, LexiconExists, StabilityCell, StabilityConfig,
};

/// Monotonic time source, injected so the core stays free of OS calls.
pub trait Clock {
    fn now_nanos(&self) -> u64;
}

/// Reports zero for every reading.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_nanos(&self) -> u64 {
        0
    }
}
