//! The reference-game lexicon: a boolean utterance × hypothesis matrix.
//!
//! Rows are stored as packed bitsets so that the consistent set of an
//! utterance sequence is a word-wise AND over a handful of rows. Each column is
//! additionally kept as a sorted list of consistent utterances, which is what
//! the speaker normalization walks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitset::BitSet;
use crate::error::{check_index, Error, Result};

/// Default bound on rejection rounds in [`sample_random_lexicon`].
pub const DEFAULT_MAX_REJECTION_ROUNDS: usize = 10_000;

#[derive(Clone, PartialEq)]
pub struct Lexicon {
    utterances: Vec<String>,
    hypotheses: Vec<String>,
    rows: Vec<BitSet>,
    columns: Vec<Vec<u32>>,
    utterance_index: BTreeMap<String, usize>,
    hypothesis_index: BTreeMap<String, usize>,
}

impl core::fmt::Debug for Lexicon {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Lexicon")
            .field("m", &self.m())
            .field("n", &self.n())
            .finish()
    }
}

impl Lexicon {
    /// Materializes `M[u,w] = predicate(u, w)` over the cross product of ids.
    pub fn build<F>(utterances: Vec<String>, hypotheses: Vec<String>, mut predicate: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> bool,
    {
        let n = hypotheses.len();
        let rows = (0..utterances.len())
            .map(|u| BitSet::from_indices(n, (0..n).filter(|&w| predicate(u, w))))
            .collect();
        Self::from_rows(utterances, hypotheses, rows)
    }

    /// Builds a lexicon from precomputed rows, validating that no row or
    /// column is empty.
    pub fn from_rows(utterances: Vec<String>, hypotheses: Vec<String>, rows: Vec<BitSet>) -> Result<Self> {
        if utterances.is_empty() || hypotheses.is_empty() {
            return Err(Error::InvalidArgument("lexicon needs at least one utterance and one hypothesis".into()));
        }
        if rows.len() != utterances.len() {
            return Err(Error::DimensionMismatch {
                expected: utterances.len(),
                found: rows.len(),
            });
        }
        let n = hypotheses.len();
        let mut columns: Vec<Vec<u32>> = alloc::vec![Vec::new(); n];
        for (u, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row.is_empty() {
                return Err(Error::EmptyRow(utterances[u].clone()));
            }
            for w in row.iter() {
                columns[w].push(u as u32);
            }
        }
        if let Some(w) = columns.iter().position(Vec::is_empty) {
            return Err(Error::EmptyColumn(hypotheses[w].clone()));
        }
        let utterance_index = index_map("utterance", &utterances)?;
        let hypothesis_index = index_map("hypothesis", &hypotheses)?;
        Ok(Self {
            utterances,
            hypotheses,
            rows,
            columns,
            utterance_index,
            hypothesis_index,
        })
    }

    /// Number of utterances (rows).
    #[inline]
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Number of hypotheses (columns).
    #[inline]
    pub fn n(&self) -> usize {
        self.hypotheses.len()
    }

    #[inline]
    pub fn is_consistent(&self, u: usize, w: usize) -> bool {
        self.rows[u].contains(w)
    }

    #[inline]
    pub fn row(&self, u: usize) -> &BitSet {
        &self.rows[u]
    }

    pub fn rows(&self) -> &[BitSet] {
        &self.rows
    }

    /// Utterances consistent with hypothesis `w`, ascending.
    #[inline]
    pub fn column(&self, w: usize) -> &[u32] {
        &self.columns[w]
    }

    pub fn utterances(&self) -> &[String] {
        &self.utterances
    }

    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }

    pub fn utterance_id(&self, u: usize) -> &str {
        &self.utterances[u]
    }

    pub fn hypothesis_id(&self, w: usize) -> &str {
        &self.hypotheses[w]
    }

    pub fn utterance_index(&self, id: &str) -> Option<usize> {
        self.utterance_index.get(id).copied()
    }

    pub fn hypothesis_index(&self, id: &str) -> Option<usize> {
        self.hypothesis_index.get(id).copied()
    }

    pub fn check_utterances(&self, us: &[usize]) -> Result<()> {
        us.iter().try_for_each(|&u| check_index("utterances", u, self.m()))
    }

    /// Hypotheses consistent with every utterance of `us`.
    pub fn consistent_set(&self, us: &[usize]) -> ConsistentSet {
        ConsistentSet(self.consistent_bits(us))
    }

    pub(crate) fn consistent_bits(&self, us: &[usize]) -> BitSet {
        let mut set = BitSet::full(self.n());
        for &u in us {
            set.intersect_with(&self.rows[u]);
        }
        set
    }

    /// Number of ones in `M`.
    pub fn ones(&self) -> usize {
        self.rows.iter().map(BitSet::count).sum()
    }

    /// True when all rows are pairwise distinct and all columns are pairwise
    /// distinct (non-emptiness is enforced at construction).
    pub fn has_unique_rows_and_columns(&self) -> bool {
        let mut rows: Vec<&BitSet> = self.rows.iter().collect();
        rows.sort();
        if rows.windows(2).any(|p| p[0] == p[1]) {
            return false;
        }
        let mut cols: Vec<&Vec<u32>> = self.columns.iter().collect();
        cols.sort();
        !cols.windows(2).any(|p| p[0] == p[1])
    }

    /// Drops rows for which `keep` returns false, preserving order.
    pub fn retain_utterances(&self, mut keep: impl FnMut(usize) -> bool) -> Result<Self> {
        let (utterances, rows) = (0..self.m())
            .filter(|&u| keep(u))
            .map(|u| (self.utterances[u].clone(), self.rows[u].clone()))
            .unzip();
        Self::from_rows(utterances, self.hypotheses.clone(), rows)
    }
}

fn index_map(what: &str, ids: &[String]) -> Result<BTreeMap<String, usize>> {
    let mut map = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        if map.insert(id.clone(), i).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate {what} id `{id}`")));
        }
    }
    Ok(map)
}

/// Hypotheses consistent with an utterance sequence, ascending by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistentSet(BitSet);

impl ConsistentSet {
    pub fn len(&self) -> usize {
        self.0.count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, w: usize) -> bool {
        self.0.contains(w)
    }

    pub fn iter(&self) -> crate::bitset::Ones<'_> {
        self.0.iter()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.0.to_vec()
    }

    pub fn bits(&self) -> &BitSet {
        &self.0
    }

    pub fn into_bits(self) -> BitSet {
        self.0
    }
}

/// Samples an `m × n` lexicon with Bernoulli(`p_true`) entries, redrawing the
/// whole matrix until rows and columns are non-empty and pairwise distinct.
pub fn sample_random_lexicon(m: usize, n: usize, p_true: f64, seed: u64) -> Result<Lexicon> {
    sample_random_lexicon_with(m, n, p_true, seed, DEFAULT_MAX_REJECTION_ROUNDS)
}

pub fn sample_random_lexicon_with(m: usize, n: usize, p_true: f64, seed: u64, max_rounds: usize) -> Result<Lexicon> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!("lexicon size {m}x{n} below 2x2")));
    }
    if !(p_true > 0.0 && p_true < 1.0) {
        return Err(Error::InvalidArgument(format!("p_true {p_true} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let utterances: Vec<String> = (0..m).map(|u| format!("u{u}")).collect();
    let hypotheses: Vec<String> = (0..n).map(|w| format!("w{w}")).collect();
    for _ in 0..max_rounds {
        let rows: Vec<BitSet> = (0..m)
            .map(|_| BitSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(p_true))))
            .collect();
        let Ok(lex) = Lexicon::from_rows(utterances.clone(), hypotheses.clone(), rows) else {
            continue;
        };
        if lex.has_unique_rows_and_columns() {
            return Ok(lex);
        }
    }
    Err(Error::SamplingExhausted { rounds: max_rounds })
}
