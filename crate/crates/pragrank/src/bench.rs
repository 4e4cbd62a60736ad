//! Per-turn timing of listeners on replay traces, and the CSV reports.

use std::fmt::Write;

use pragrank_core::eval::{replay_all_turns, timing_table, CurvePoint, Listener, ReplayTrace, TimingRow};

use crate::clock::MonotonicClock;

pub const TIMING_HEADER: &str = "listener,turn,median_ms,ops";
pub const CURVE_HEADER: &str = "listener,turn,success_rate,ci_lo,ci_hi";

/// Plays every trace `repetitions` times per listener on the calling thread
/// after one untimed warm-up pass, and reports per-turn medians over all
/// plays.
pub fn bench(listeners: &[&dyn Listener], traces: &[ReplayTrace], repetitions: usize) -> Vec<TimingRow> {
    let clock = MonotonicClock::new();
    let mut rows = Vec::new();
    for listener in listeners {
        for t in traces {
            replay_all_turns(t, *listener, 1, &clock);
        }
        let results: Vec<_> = (0..repetitions.max(1))
            .flat_map(|_| traces.iter().map(|t| replay_all_turns(t, *listener, 1, &clock)).collect::<Vec<_>>())
            .collect();
        rows.extend(timing_table(listener.name(), &results));
    }
    rows
}

/// Median per-turn time of one listener over turns `turns`, from rows for
/// possibly many listeners.
pub fn median_over_turns(rows: &[TimingRow], listener: &str, turns: std::ops::RangeInclusive<usize>) -> Option<f64> {
    let mut v: Vec<f64> = rows
        .iter()
        .filter(|r| r.listener == listener && turns.contains(&r.turn))
        .map(|r| r.median_ms)
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut out = format!("{TIMING_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.listener, r.turn, r.median_ms, r.ops).expect("string write");
    }
    out
}

pub fn curve_csv(curves: &[(String, Vec<CurvePoint>)]) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for (listener, points) in curves {
        for p in points {
            writeln!(out, "{listener},{},{},{},{}", p.turn, p.success_rate, p.ci_lo, p.ci_hi).expect("string write");
        }
    }
    out
}
