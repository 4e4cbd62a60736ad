//! Example-agnostic global rankings and the rank-based listener.
//!
//! A [`GlobalRanking`] is a score per hypothesis (higher is preferred) and the
//! total order it induces. Filtering the consistent set and reading it off in
//! that order is the amortized synthesizer: no per-example normalization, one
//! pass over the hypotheses.

mod anneal;
mod dataset;

pub use anneal::{anneal_ranking, AnnealConfig, AnnealOutcome};
pub use dataset::{
    cycle_report, cycle_report_sampled, generate_dataset, records_for_target, single_utterance_dataset, CycleReport,
    RankingDataset, Record,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::order::{compare_with_tolerance, rank_descending, Scored};
use crate::rsa::NormalizationVectors;

/// Relative tolerance under which two listener probabilities are treated as
/// tied by [`check_global_ranking`].
pub const CHECK_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalRanking {
    scores: Vec<f64>,
    order: Vec<usize>,
    position: Vec<usize>,
}

impl GlobalRanking {
    /// Orders hypotheses by descending score; near-equal scores fall back to
    /// ascending index.
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("ranking scores must be finite".into()));
        }
        let order: Vec<usize> = rank_descending(
            scores
                .iter()
                .enumerate()
                .map(|(w, &score)| Scored { hypothesis: w, score })
                .collect(),
        )
        .into_iter()
        .map(|s| s.hypothesis)
        .collect();
        Ok(Self::with_order(scores, order))
    }

    /// From an explicit best-first permutation; scores become reverse ranks.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &w in &order {
            if w >= n || core::mem::replace(&mut seen[w], true) {
                return Err(Error::InvalidArgument("order is not a permutation".into()));
            }
        }
        let mut scores = vec![0.0; n];
        for (rank, &w) in order.iter().enumerate() {
            scores[w] = (n - rank) as f64;
        }
        Ok(Self::with_order(scores, order))
    }

    fn with_order(scores: Vec<f64>, order: Vec<usize>) -> Self {
        let mut position = vec![0; order.len()];
        for (rank, &w) in order.iter().enumerate() {
            position[w] = rank;
        }
        Self { scores, order, position }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, w: usize) -> f64 {
        self.scores[w]
    }

    /// Hypotheses best first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self, w: usize) -> usize {
        self.position[w]
    }

    /// Whether `a` precedes `b`.
    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.position[a] < self.position[b]
    }

    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        let scores = self.scores.iter().map(|s| -s).collect();
        Self::with_order(scores, order)
    }
}

/// The ranking implied by a chain: `σ_{L_depth}[w] = P(w) · c_1[w] ⋯ c_depth[w]`.
///
/// `L_1 = M * (r_0 r_1 ⊗ P c_1)`, so the first listener with a non-trivial
/// ranking already carries one column normalizer.
pub fn extract_ranking_from_chain(nv: &NormalizationVectors, depth: usize) -> Result<GlobalRanking> {
    if depth == 0 || depth > nv.depth {
        return Err(Error::DepthTooShallow {
            requested: depth,
            available: nv.depth,
        });
    }
    GlobalRanking::from_scores(nv.column_factor(depth))
}

/// `L_σ`: the consistent set of `us`, best first under `σ`, truncated to `k`.
pub fn rank_listener(ranking: &GlobalRanking, lex: &Lexicon, us: &[usize], k: usize) -> Result<Vec<Scored>> {
    lex.check_utterances(us)?;
    let consistent = lex.consistent_set(us);
    let (ranked, _) = rank_filtered(ranking, consistent.bits(), k);
    if ranked.is_empty() && k > 0 {
        return Err(Error::NoConsistentProgram);
    }
    Ok(ranked)
}

/// Walks `σ` best first and keeps members of `consistent` until `k` are found.
/// Returns the selection and the number of hypotheses visited.
pub fn rank_filtered(ranking: &GlobalRanking, consistent: &BitSet, k: usize) -> (Vec<Scored>, u64) {
    let mut out = Vec::with_capacity(k.min(64));
    let mut visited = 0u64;
    if k == 0 {
        return (out, 0);
    }
    for &w in &ranking.order {
        visited += 1;
        if consistent.contains(w) {
            out.push(Scored {
                hypothesis: w,
                score: ranking.scores[w],
            });
            if out.len() == k {
                break;
            }
        }
    }
    (out, visited)
}

/// A triple where the listener strictly prefers `preferred` over `other` given
/// `utterance`, but the ranking does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counterexample {
    pub utterance: usize,
    pub preferred: usize,
    pub other: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingCheck {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

/// Exhaustively checks `L(w|u) > L(w'|u) ⟺ σ[w] ≻ σ[w']` over every utterance
/// and every pair with positive probability.
///
/// Probabilities within [`CHECK_RTOL`] of each other are ties and constrain
/// nothing, since a total order cannot express them.
pub fn check_global_ranking<L>(listener: L, ranking: &GlobalRanking, lex: &Lexicon) -> RankingCheck
where
    L: Fn(usize, usize) -> f64,
{
    for u in 0..lex.m() {
        let row: Vec<Scored> = lex
            .row(u)
            .iter()
            .map(|w| Scored {
                hypothesis: w,
                score: listener(u, w),
            })
            .filter(|s| s.score > 0.0)
            .collect();
        if let Some(cx) = first_violation(u, row, ranking) {
            return RankingCheck {
                holds: false,
                counterexample: Some(cx),
            };
        }
    }
    RankingCheck {
        holds: true,
        counterexample: None,
    }
}

fn first_violation(u: usize, row: Vec<Scored>, ranking: &GlobalRanking) -> Option<Counterexample> {
    let row = rank_descending(row);
    // every member of a strictly better tie group must precede every member of a worse one
    let mut latest: Option<usize> = None;
    let mut start = 0;
    while start < row.len() {
        let mut end = start + 1;
        while end < row.len()
            && compare_with_tolerance(row[end - 1].score, row[end].score, CHECK_RTOL) == core::cmp::Ordering::Equal
        {
            end += 1;
        }
        let group = &row[start..end];
        if let Some(prev) = latest {
            let earliest = group
                .iter()
                .map(|s| s.hypothesis)
                .min_by_key(|&w| ranking.position(w))
                .expect("non-empty group");
            if ranking.position(earliest) < ranking.position(prev) {
                return Some(Counterexample {
                    utterance: u,
                    preferred: prev,
                    other: earliest,
                });
            }
        }
        let group_latest = group
            .iter()
            .map(|s| s.hypothesis)
            .max_by_key(|&w| ranking.position(w))
            .expect("non-empty group");
        latest = Some(match latest {
            Some(prev) if ranking.position(prev) > ranking.position(group_latest) => prev,
            _ => group_latest,
        });
        start = end;
    }
    None
}
