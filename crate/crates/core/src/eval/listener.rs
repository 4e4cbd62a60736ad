use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::error::{check_index, Error, Result};
use crate::lexicon::Lexicon;
use crate::order::Scored;
use crate::ranking::GlobalRanking;
use crate::rsa::{IncrementalRsa, Prior};

/// A synthesizer that receives examples one at a time.
pub trait Listener {
    fn name(&self) -> &str;
    fn start(&self) -> Box<dyn ListenerSession + '_>;
}

pub trait ListenerSession {
    fn observe(&mut self, u: usize) -> Result<()>;
    /// Best `k` programs consistent with everything observed so far.
    fn top_k(&mut self, k: usize) -> Result<Vec<Scored>>;
    /// Elementary operations spent since the session started.
    fn ops(&self) -> u64;
}

/// Filter-then-sort listener over a fixed global ranking. With the prior as
/// the ranking this is the literal listener.
///
/// Lexicon rows are stored re-indexed by rank position, so the consistent set
/// is kept in rank order and its best `k` members are its first `k` set bits.
pub struct RankListener<'a> {
    name: String,
    lex: &'a Lexicon,
    ranking: GlobalRanking,
    ranked_rows: Vec<BitSet>,
}

impl<'a> RankListener<'a> {
    pub fn new(name: impl Into<String>, lex: &'a Lexicon, ranking: GlobalRanking) -> Result<Self> {
        if ranking.len() != lex.n() {
            return Err(Error::DimensionMismatch {
                expected: lex.n(),
                found: ranking.len(),
            });
        }
        let ranked_rows = lex
            .rows()
            .iter()
            .map(|row| BitSet::from_indices(lex.n(), row.iter().map(|w| ranking.position(w))))
            .collect();
        Ok(Self {
            name: name.into(),
            lex,
            ranking,
            ranked_rows,
        })
    }

    /// `L0`: every consistent program weighted by its prior, ties by index.
    pub fn literal(lex: &'a Lexicon, prior: &Prior) -> Result<Self> {
        if prior.len() != lex.n() {
            return Err(Error::DimensionMismatch {
                expected: lex.n(),
                found: prior.len(),
            });
        }
        Self::new("l0", lex, GlobalRanking::from_scores(prior.weights().to_vec())?)
    }

    pub fn ranking(&self) -> &GlobalRanking {
        &self.ranking
    }
}

struct RankSession<'a> {
    listener: &'a RankListener<'a>,
    /// Consistent programs by rank position.
    consistent: BitSet,
    ops: u64,
}

impl ListenerSession for RankSession<'_> {
    fn observe(&mut self, u: usize) -> Result<()> {
        check_index("utterances", u, self.listener.lex.m())?;
        self.consistent.intersect_with(&self.listener.ranked_rows[u]);
        self.ops += self.consistent.words().len() as u64;
        Ok(())
    }

    fn top_k(&mut self, k: usize) -> Result<Vec<Scored>> {
        let ranking = &self.listener.ranking;
        let top: Vec<Scored> = self
            .consistent
            .iter()
            .take(k)
            .map(|pos| {
                let w = ranking.order()[pos];
                Scored {
                    hypothesis: w,
                    score: ranking.score(w),
                }
            })
            .collect();
        // words scanned to reach the last hit, or all of them on a short set
        self.ops += match top.last() {
            Some(s) if top.len() == k => (ranking.position(s.hypothesis) / 64 + 1) as u64,
            _ => self.consistent.words().len() as u64,
        };
        if top.is_empty() && k > 0 {
            return Err(Error::NoConsistentProgram);
        }
        Ok(top)
    }

    fn ops(&self) -> u64 {
        self.ops
    }
}

impl Listener for RankListener<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&self) -> Box<dyn ListenerSession + '_> {
        Box::new(RankSession {
            listener: self,
            consistent: BitSet::full(self.lex.n()),
            ops: 0,
        })
    }
}

/// The exact incremental pragmatic listener.
pub struct ExactL1<'a> {
    lex: &'a Lexicon,
    prior: &'a Prior,
}

impl<'a> ExactL1<'a> {
    pub fn new(lex: &'a Lexicon, prior: &'a Prior) -> Result<Self> {
        IncrementalRsa::new(lex, prior)?;
        Ok(Self { lex, prior })
    }
}

impl ListenerSession for IncrementalRsa<'_> {
    fn observe(&mut self, u: usize) -> Result<()> {
        self.push(u)
    }

    fn top_k(&mut self, k: usize) -> Result<Vec<Scored>> {
        self.ranked(k)
    }

    fn ops(&self) -> u64 {
        IncrementalRsa::ops(self)
    }
}

impl Listener for ExactL1<'_> {
    fn name(&self) -> &str {
        "l1"
    }

    fn start(&self) -> Box<dyn ListenerSession + '_> {
        Box::new(IncrementalRsa::new(self.lex, self.prior).expect("prior checked at construction"))
    }
}
