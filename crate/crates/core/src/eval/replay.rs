use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_index, Error, Result};
use crate::eval::{Clock, Listener};
use crate::lexicon::Lexicon;
use crate::rsa::{IncrementalRsa, Prior};

/// Where a trace came from: people playing against the literal listener,
/// people playing against a pragmatic one, or the simulated speaker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceTag {
    H0,
    H1,
    Simulated,
}

impl fmt::Display for TraceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceTag::H0 => "H0",
            TraceTag::H1 => "H1",
            TraceTag::Simulated => "simulated",
        })
    }
}

impl FromStr for TraceTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H0" => Ok(TraceTag::H0),
            "H1" => Ok(TraceTag::H1),
            "simulated" => Ok(TraceTag::Simulated),
            other => Err(Error::InvalidArgument(alloc::format!("unknown trace tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayTrace {
    pub tag: TraceTag,
    pub target: usize,
    pub utterances: Vec<usize>,
}

impl ReplayTrace {
    /// Non-empty and every utterance consistent with the target.
    pub fn validate(&self, lex: &Lexicon) -> Result<()> {
        check_index("hypotheses", self.target, lex.n())?;
        if self.utterances.is_empty() {
            return Err(Error::InvalidArgument("trace has no utterances".into()));
        }
        for (position, &u) in self.utterances.iter().enumerate() {
            check_index("utterances", u, lex.m())?;
            if !lex.is_consistent(u, self.target) {
                return Err(Error::InconsistentTarget {
                    hypothesis: self.target,
                    position,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Turn {
    pub success: bool,
    pub nanos: u64,
    pub ops: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnResult {
    pub turns: Vec<Turn>,
    /// 1-based turn of the first success.
    pub first_success: Option<usize>,
}

impl TurnResult {
    /// Success is absorbing: solved at `turn` if solved at or before it.
    pub fn solved_by(&self, turn: usize) -> bool {
        self.first_success.is_some_and(|t| t <= turn)
    }
}

fn run(trace: &ReplayTrace, listener: &dyn Listener, k: usize, clock: &dyn Clock, stop: bool) -> TurnResult {
    let mut session = listener.start();
    let mut turns = Vec::with_capacity(trace.utterances.len());
    let mut first_success = None;
    for &u in &trace.utterances {
        let ops_before = session.ops();
        let start = clock.now_nanos();
        let answer = session.observe(u).and_then(|_| session.top_k(k));
        let nanos = clock.now_nanos().saturating_sub(start);
        let success = answer.is_ok_and(|top| top.iter().any(|s| s.hypothesis == trace.target));
        turns.push(Turn {
            success,
            nanos,
            ops: session.ops() - ops_before,
        });
        if success && first_success.is_none() {
            first_success = Some(turns.len());
            if stop {
                break;
            }
        }
    }
    TurnResult { turns, first_success }
}

/// Feeds the trace one utterance at a time and stops at the first turn whose
/// top-`k` contains the target. A turn with no consistent program fails.
pub fn replay(trace: &ReplayTrace, listener: &dyn Listener, k: usize, clock: &dyn Clock) -> TurnResult {
    run(trace, listener, k, clock, true)
}

/// As [`replay`] but plays every turn, for timing.
pub fn replay_all_turns(trace: &ReplayTrace, listener: &dyn Listener, k: usize, clock: &dyn Clock) -> TurnResult {
    run(trace, listener, k, clock, false)
}

/// The greedy pragmatic speaker's first `n` utterances for each target.
pub fn simulate_traces(lex: &Lexicon, prior: &Prior, targets: &[usize], n: usize) -> Result<Vec<ReplayTrace>> {
    if n == 0 {
        return Err(Error::InvalidArgument("traces need at least one utterance".into()));
    }
    targets
        .iter()
        .map(|&w| {
            check_index("hypotheses", w, lex.n())?;
            let mut speaker = IncrementalRsa::new(lex, prior)?;
            for _ in 0..n {
                let u = speaker.best_next_utterance(w)?;
                speaker.push(u)?;
            }
            Ok(ReplayTrace {
                tag: TraceTag::Simulated,
                target: w,
                utterances: speaker.prefix().to_vec(),
            })
        })
        .collect()
}

/// Percentile bootstrap 95% interval for the mean of `values`.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    if values.is_empty() || resamples == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..values.len()).map(|_| values[rng.gen_range(0..values.len())]).sum::<f64>() / values.len() as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * (resamples - 1) as f64) + 0.5) as usize];
    (at(0.025), at(0.975))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub turn: usize,
    pub success_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Cumulative success rate at turns `1..=turns` with bootstrap intervals.
pub fn success_curve(results: &[TurnResult], turns: usize, resamples: usize, seed: u64) -> Vec<CurvePoint> {
    (1..=turns)
        .map(|turn| {
            let flags: Vec<f64> = results.iter().map(|r| f64::from(u8::from(r.solved_by(turn)))).collect();
            let rate = if flags.is_empty() {
                0.0
            } else {
                flags.iter().sum::<f64>() / flags.len() as f64
            };
            let (ci_lo, ci_hi) = bootstrap_mean_ci(&flags, resamples, seed ^ turn as u64);
            CurvePoint {
                turn,
                success_rate: rate,
                ci_lo,
                ci_hi,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub listener: String,
    pub turn: usize,
    pub median_ms: f64,
    pub ops: u64,
}

fn median_u64(mut v: Vec<u64>) -> u64 {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Median wall time and operation count per turn across `results`.
pub fn timing_table(listener: &str, results: &[TurnResult]) -> Vec<TimingRow> {
    let turns = results.iter().map(|r| r.turns.len()).max().unwrap_or(0);
    (0..turns)
        .filter_map(|t| {
            let at: Vec<&crate::eval::Turn> = results.iter().filter_map(|r| r.turns.get(t)).collect();
            if at.is_empty() {
                return None;
            }
            Some(TimingRow {
                listener: listener.into(),
                turn: t + 1,
                median_ms: median_u64(at.iter().map(|x| x.nanos).collect()) as f64 / 1e6,
                ops: median_u64(at.iter().map(|x| x.ops).collect()),
            })
        })
        .collect()
}
