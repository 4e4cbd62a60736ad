//! Incremental RSA for utterance sequences.
//!
//! After a prefix `u_1..u_{j-1}` the game is restricted to the consistent set
//! `C_{j-1}`. The speaker's next factor for hypothesis `w` is the
//! single-utterance speaker on that restricted game:
//!
//! ```text
//! S1(u_j | w, prefix) = L0(w | prefix, u_j) / Σ_{u'} L0(w | prefix, u')
//! L0(w | prefix, u)   = P(w) M[u,w] / Z(u),   Z(u) = Σ_{w' ∈ C_{j-1}} P(w') M[u,w']
//! ```
//!
//! `P(w)` cancels, leaving `(1/Z(u_j)) / Σ_{u' ∈ col(w)} 1/Z(u')`. The listener
//! ranks the final consistent set by the product of these factors.

use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::error::{check_index, Error, Result};
use crate::lexicon::Lexicon;
use crate::order::{nearly_equal, rank_descending, Scored, TIE_RTOL};
use crate::rsa::Prior;

/// Exact incremental S1/L1 state for one utterance prefix.
///
/// Extending the prefix by one utterance only evaluates the new speaker factor,
/// so a session driven turn by turn never recomputes earlier prefixes.
#[derive(Clone)]
pub struct IncrementalRsa<'a> {
    lex: &'a Lexicon,
    prior: &'a Prior,
    prefix: Vec<usize>,
    consistent: BitSet,
    speaker: Vec<f64>,
    ops: u64,
}

impl<'a> IncrementalRsa<'a> {
    pub fn new(lex: &'a Lexicon, prior: &'a Prior) -> Result<Self> {
        prior.check(lex)?;
        Ok(Self {
            lex,
            prior,
            prefix: Vec::new(),
            consistent: BitSet::full(lex.n()),
            speaker: vec![1.0; lex.n()],
            ops: 0,
        })
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn consistent(&self) -> &BitSet {
        &self.consistent
    }

    /// Elementary operations spent so far (bitset words touched plus
    /// per-utterance speaker terms).
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// `Z(u)` for every utterance under the current consistent set.
    fn masses(&mut self) -> Vec<f64> {
        let lex = self.lex;
        let words = self.consistent.words().len() as u64;
        self.ops += lex.m() as u64 * words;
        if self.prior.is_uniform() {
            let p = self.prior.weight(0);
            lex.rows()
                .iter()
                .map(|row| row.intersection_count(&self.consistent) as f64 * p)
                .collect()
        } else {
            lex.rows()
                .iter()
                .map(|row| {
                    row.intersection(&self.consistent)
                        .iter()
                        .map(|w| self.prior.weight(w))
                        .sum()
                })
                .collect()
        }
    }

    /// Appends `u` and folds its speaker factor into every surviving hypothesis.
    pub fn push(&mut self, u: usize) -> Result<()> {
        check_index("utterances", u, self.lex.m())?;
        let masses = self.masses();
        self.consistent.intersect_with(self.lex.row(u));
        let numerator = masses[u];
        for w in self.consistent.iter() {
            if self.prior.weight(w) == 0.0 {
                self.speaker[w] = 0.0;
                continue;
            }
            let column = self.lex.column(w);
            self.ops += column.len() as u64;
            let denominator: f64 = column.iter().map(|&v| 1.0 / masses[v as usize]).sum();
            self.speaker[w] *= (1.0 / numerator) / denominator;
        }
        self.prefix.push(u);
        Ok(())
    }

    /// `S1(prefix | w)` as a running product. Zero for hypotheses outside the
    /// consistent set.
    pub fn speaker_probability(&self, w: usize) -> f64 {
        if self.consistent.contains(w) {
            self.speaker[w]
        } else {
            0.0
        }
    }

    /// The speaker's most likely next utterance for `w`: the consistent
    /// utterance with the smallest remaining mass, lowest index among ties.
    pub fn best_next_utterance(&mut self, w: usize) -> Result<usize> {
        check_index("hypotheses", w, self.lex.n())?;
        if !self.consistent.contains(w) {
            return Err(Error::SpeakerStuck(w));
        }
        let masses = self.masses();
        let column = self.lex.column(w);
        self.ops += column.len() as u64;
        let best = column
            .iter()
            .map(|&u| masses[u as usize])
            .filter(|z| *z > 0.0)
            .fold(f64::INFINITY, f64::min);
        column
            .iter()
            .map(|&u| u as usize)
            .find(|&u| masses[u] > 0.0 && nearly_equal(masses[u], best, TIE_RTOL))
            .ok_or(Error::SpeakerStuck(w))
    }

    /// `L1(· | prefix)` over the consistent set, normalized, best first.
    pub fn ranked(&mut self, k: usize) -> Result<Vec<Scored>> {
        if self.consistent.is_empty() {
            return Err(Error::NoConsistentProgram);
        }
        let total: f64 = self.consistent.iter().map(|w| self.speaker[w]).sum();
        self.ops += self.consistent.count() as u64;
        let items = self
            .consistent
            .iter()
            .map(|w| Scored {
                hypothesis: w,
                score: if total > 0.0 { self.speaker[w] / total } else { 0.0 },
            })
            .collect();
        let mut ranked = rank_descending(items);
        ranked.truncate(k);
        Ok(ranked)
    }
}

/// `S1(u_1..u_ℓ | w)` under incremental RSA.
pub fn incremental_speaker(lex: &Lexicon, prior: &Prior, w: usize, us: &[usize]) -> Result<f64> {
    check_index("hypotheses", w, lex.n())?;
    let mut session = IncrementalRsa::new(lex, prior)?;
    for (position, &u) in us.iter().enumerate() {
        session.push(u)?;
        if !session.consistent().contains(w) {
            return Err(Error::InconsistentTarget { hypothesis: w, position });
        }
    }
    Ok(session.speaker_probability(w))
}

/// Top-`k` hypotheses under `L1(w | us) ∝ S1(us | w)`.
pub fn incremental_pragmatic_listener(lex: &Lexicon, prior: &Prior, us: &[usize], k: usize) -> Result<Vec<Scored>> {
    if us.is_empty() {
        return Err(Error::InvalidArgument("pragmatic listener needs at least one utterance".into()));
    }
    let mut session = IncrementalRsa::new(lex, prior)?;
    for &u in us {
        session.push(u)?;
    }
    session.ranked(k)
}
