//! Regular expressions over the binary alphabet `{0,1}`.
//!
//! Programs are concatenations of quantified atoms (`0+1{1}`, `0{2}1+`, ...)
//! with anchored, full-string semantics. Matching compiles to a Thompson NFA
//! and simulates it one state set at a time, so cost is linear in the string.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    /// Bare atom.
    One,
    Star,
    Plus,
    Optional,
    /// `{n}`, kept distinct from a bare atom even for `n = 1` so sources round-trip.
    Exactly(u8),
}

impl Quantifier {
    fn bounds(self) -> (usize, Option<usize>) {
        match self {
            Quantifier::One => (1, Some(1)),
            Quantifier::Star => (0, None),
            Quantifier::Plus => (1, None),
            Quantifier::Optional => (0, Some(1)),
            Quantifier::Exactly(n) => (n as usize, Some(n as usize)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    /// `b'0'` or `b'1'`.
    pub atom: u8,
    pub quantifier: Quantifier,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Regex {
    factors: Vec<Factor>,
}

impl Regex {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::MalformedProgram("empty regex".into()));
        }
        if let Some(f) = factors.iter().find(|f| f.atom != b'0' && f.atom != b'1') {
            return Err(Error::MalformedProgram(alloc::format!("atom {:?} outside {{0,1}}", f.atom as char)));
        }
        if factors.iter().any(|f| f.quantifier == Quantifier::Exactly(0)) {
            return Err(Error::MalformedProgram("{0} repetition".into()));
        }
        Ok(Self { factors })
    }

    pub fn parse(source: &str) -> Result<Self> {
        let bytes = source.as_bytes();
        let mut factors = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let atom = bytes[i];
            if atom != b'0' && atom != b'1' {
                return Err(Error::MalformedProgram(alloc::format!("unexpected {:?} at {i} in {source:?}", atom as char)));
            }
            i += 1;
            let quantifier = match bytes.get(i) {
                Some(b'*') => {
                    i += 1;
                    Quantifier::Star
                }
                Some(b'+') => {
                    i += 1;
                    Quantifier::Plus
                }
                Some(b'?') => {
                    i += 1;
                    Quantifier::Optional
                }
                Some(b'{') => {
                    let close = source[i..]
                        .find('}')
                        .ok_or_else(|| Error::MalformedProgram(alloc::format!("unclosed repetition in {source:?}")))?;
                    let n: u8 = source[i + 1..i + close]
                        .parse()
                        .map_err(|_| Error::MalformedProgram(alloc::format!("bad repetition count in {source:?}")))?;
                    i += close + 1;
                    Quantifier::Exactly(n)
                }
                _ => Quantifier::One,
            };
            factors.push(Factor { atom, quantifier });
        }
        Self::new(factors)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Shortest string in the language.
    pub fn shortest_match(&self) -> String {
        let mut s = String::new();
        for f in &self.factors {
            for _ in 0..f.quantifier.bounds().0 {
                s.push(f.atom as char);
            }
        }
        s
    }

    pub fn compile(&self) -> Nfa {
        Nfa::compile(self)
    }

    pub fn is_match(&self, s: &str) -> bool {
        self.compile().is_match(s.as_bytes())
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for factor in &self.factors {
            write!(f, "{}", factor.atom as char)?;
            match factor.quantifier {
                Quantifier::One => {}
                Quantifier::Star => f.write_str("*")?,
                Quantifier::Plus => f.write_str("+")?,
                Quantifier::Optional => f.write_str("?")?,
                Quantifier::Exactly(n) => write!(f, "{{{n}}}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum State {
    Char(u8, usize),
    Split(usize, usize),
    Match,
}

/// Thompson automaton for one program.
#[derive(Debug, Clone)]
pub struct Nfa {
    states: Vec<State>,
    start: usize,
}

impl Nfa {
    fn compile(re: &Regex) -> Self {
        // built back to front so every state knows its successor
        let mut states = vec![State::Match];
        let mut next = 0;
        for f in re.factors.iter().rev() {
            let c = f.atom;
            match f.quantifier {
                Quantifier::One => {
                    states.push(State::Char(c, next));
                    next = states.len() - 1;
                }
                Quantifier::Exactly(n) => {
                    for _ in 0..n {
                        states.push(State::Char(c, next));
                        next = states.len() - 1;
                    }
                }
                Quantifier::Optional => {
                    states.push(State::Char(c, next));
                    let ch = states.len() - 1;
                    states.push(State::Split(ch, next));
                    next = states.len() - 1;
                }
                Quantifier::Star => {
                    // split -> (char -> split) | next
                    let split = states.len();
                    states.push(State::Split(split + 1, next));
                    states.push(State::Char(c, split));
                    next = split;
                }
                Quantifier::Plus => {
                    // char -> split -> (char | next)
                    let ch = states.len();
                    states.push(State::Char(c, ch + 1));
                    states.push(State::Split(ch, next));
                    next = ch;
                }
            }
        }
        Self { states, start: next }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn add(&self, set: &mut Vec<usize>, mark: &mut [u32], generation: u32, s: usize) {
        if mark[s] == generation {
            return;
        }
        mark[s] = generation;
        match self.states[s] {
            State::Split(a, b) => {
                self.add(set, mark, generation, a);
                self.add(set, mark, generation, b);
            }
            _ => set.push(s),
        }
    }

    /// Anchored match of the whole input.
    pub fn is_match(&self, input: &[u8]) -> bool {
        let mut mark = vec![0u32; self.states.len()];
        let mut generation = 1;
        let mut current = Vec::with_capacity(self.states.len());
        let mut next = Vec::with_capacity(self.states.len());
        self.add(&mut current, &mut mark, generation, self.start);
        for &c in input {
            generation += 1;
            next.clear();
            for &s in &current {
                if let State::Char(a, to) = self.states[s] {
                    if a == c {
                        self.add(&mut next, &mut mark, generation, to);
                    }
                }
            }
            core::mem::swap(&mut current, &mut next);
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|&s| matches!(self.states[s], State::Match))
    }
}

/// Grammar: 1..=`max_factors` factors alternating between `0` and `1`
/// (adjacent factors never share an atom), the first factor drawing its
/// quantifier from `lead`, later ones from `rest`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarConfig {
    pub max_factors: usize,
    pub lead: Vec<Quantifier>,
    pub rest: Vec<Quantifier>,
}

impl GrammarConfig {
    /// About 350 distinct programs.
    pub fn small() -> Self {
        use Quantifier::*;
        Self {
            max_factors: 3,
            lead: vec![One, Star, Plus, Optional, Exactly(2), Exactly(3)],
            rest: vec![One, Star, Plus, Optional, Exactly(2)],
        }
    }

    /// About 3500 distinct programs.
    pub fn large() -> Self {
        use Quantifier::*;
        Self {
            max_factors: 4,
            lead: vec![One, Star, Plus, Optional, Exactly(2), Exactly(3), Exactly(4)],
            rest: vec![One, Star, Plus, Optional, Exactly(2), Exactly(3)],
        }
    }

    /// Every derivation, in a fixed order.
    pub fn enumerate(&self) -> Vec<Regex> {
        let mut out = Vec::new();
        for len in 1..=self.max_factors {
            let combos = self.lead.len() * self.rest.len().pow(len as u32 - 1);
            for first in [b'0', b'1'] {
                for mut code in 0..combos {
                    // mixed-radix digits, last factor varying fastest
                    let mut factors = vec![Factor { atom: first, quantifier: Quantifier::One }; len];
                    for i in (0..len).rev() {
                        let options = if i == 0 { &self.lead } else { &self.rest };
                        factors[i] = Factor {
                            atom: if i % 2 == 0 { first } else { first ^ 1 },
                            quantifier: options[code % options.len()],
                        };
                        code /= options.len();
                    }
                    out.push(Regex { factors });
                }
            }
        }
        out
    }

    /// Production-sequence one-hot features: factor count, first atom, and one
    /// quantifier slot per factor position (with an "absent" choice).
    pub fn encode(&self, re: &Regex) -> Result<Vec<f64>> {
        let slots = self.lead.len() + 1;
        let mut v = vec![0.0; self.encoding_dim()];
        let len = re.factors.len();
        if len > self.max_factors {
            return Err(Error::MalformedProgram(alloc::format!("{re} has more than {} factors", self.max_factors)));
        }
        v[len - 1] = 1.0;
        v[self.max_factors + usize::from(re.factors[0].atom == b'1')] = 1.0;
        let base = self.max_factors + 2;
        for i in 0..self.max_factors {
            let idx = match re.factors.get(i) {
                None => self.lead.len(),
                Some(f) => {
                    if i > 0 && f.atom == re.factors[i - 1].atom {
                        return Err(Error::MalformedProgram(alloc::format!("{re} repeats an atom")));
                    }
                    let allowed = if i == 0 { &self.lead } else { &self.rest };
                    if !allowed.contains(&f.quantifier) {
                        return Err(Error::MalformedProgram(alloc::format!("{re} uses a quantifier outside the grammar")));
                    }
                    self.lead.iter().position(|q| *q == f.quantifier).expect("rest ⊆ lead")
                }
            };
            v[base + i * slots + idx] = 1.0;
        }
        Ok(v)
    }

    pub fn encoding_dim(&self) -> usize {
        self.max_factors + 2 + self.max_factors * (self.lead.len() + 1)
    }
}

/// A random member of the language of `re` no longer than `l_max`, or `None`
/// if the draw overshot.
fn random_member(re: &Regex, l_max: usize, rng: &mut ChaCha8Rng) -> Option<String> {
    let mut counts = Vec::with_capacity(re.factors.len());
    let mut total = 0;
    for f in &re.factors {
        let (lo, hi) = f.quantifier.bounds();
        let hi = hi.unwrap_or(l_max).max(lo);
        let k = rng.gen_range(lo..=hi);
        total += k;
        counts.push(k);
    }
    if total > l_max {
        return None;
    }
    let mut s = String::with_capacity(total);
    for (f, k) in re.factors.iter().zip(counts) {
        for _ in 0..k {
            s.push(f.atom as char);
        }
    }
    Some(s)
}

/// `count` distinct strings of length ≤ `l_max`.
///
/// Always contains the empty string, every string of length ≤ 3 that some
/// program matches, and the shortest match of every program, so every program
/// matches at least one sampled string and every string is matched by some
/// program. The rest are drawn by picking a random program and a random member
/// of its language. Output is sorted by (length, string).
pub fn sample_strings(programs: &[Regex], count: usize, l_max: usize, seed: u64) -> Result<Vec<String>> {
    let nfas: Vec<Nfa> = programs.iter().map(Regex::compile).collect();
    let mut chosen: alloc::collections::BTreeSet<(usize, String)> = alloc::collections::BTreeSet::new();
    chosen.insert((0, String::new()));
    for len in 1..=3usize.min(l_max) {
        for bits in 0..(1u32 << len) {
            let s: String = (0..len)
                .map(|i| if bits >> (len - 1 - i) & 1 == 1 { '1' } else { '0' })
                .collect();
            if nfas.iter().any(|n| n.is_match(s.as_bytes())) {
                chosen.insert((len, s));
            }
        }
    }
    for re in programs {
        let s = re.shortest_match();
        if s.len() > l_max {
            return Err(Error::CoverageImpossible(alloc::format!("{re} matches nothing of length ≤ {l_max}")));
        }
        chosen.insert((s.len(), s));
    }
    if chosen.len() > count {
        return Err(Error::InvalidArgument(alloc::format!(
            "coverage needs {} strings but only {count} requested",
            chosen.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut misses = 0usize;
    while chosen.len() < count {
        let re = programs.choose(&mut rng).ok_or(Error::InsufficientStrings {
            requested: count,
            available: chosen.len(),
        })?;
        let fresh = random_member(re, l_max, &mut rng).is_some_and(|s| chosen.insert((s.len(), s)));
        if fresh {
            misses = 0;
        } else {
            misses += 1;
            if misses > 100_000 {
                return Err(Error::InsufficientStrings {
                    requested: count,
                    available: chosen.len(),
                });
            }
        }
    }
    Ok(chosen.into_iter().map(|(_, s)| s).collect())
}

/// Which of `strings` each program matches.
pub fn behaviors(programs: &[Regex], strings: &[String]) -> Vec<BitSet> {
    programs
        .iter()
        .map(|re| {
            let nfa = re.compile();
            BitSet::from_indices(
                strings.len(),
                strings.iter().enumerate().filter(|(_, s)| nfa.is_match(s.as_bytes())).map(|(i, _)| i),
            )
        })
        .collect()
}

/// Keeps one program per behavior vector, the one with the shortest source
/// (lexicographically smallest among equals), sorted by (length, source).
pub fn dedupe_by_behavior(programs: &[Regex], behaviors: &[BitSet]) -> Vec<Regex> {
    let mut classes: BTreeMap<&BitSet, (usize, String, &Regex)> = BTreeMap::new();
    for (re, b) in programs.iter().zip(behaviors) {
        let src = alloc::format!("{re}");
        let key = (src.len(), src, re);
        classes
            .entry(b)
            .and_modify(|best| {
                if (key.0, &key.1) < (best.0, &best.1) {
                    *best = key.clone();
                }
            })
            .or_insert(key);
    }
    let mut kept: Vec<(usize, String, Regex)> = classes.into_values().map(|(l, s, r)| (l, s, r.clone())).collect();
    kept.sort();
    kept.into_iter().map(|(_, _, r)| r).collect()
}

/// Enumerates the grammar and collapses programs that agree on every string
/// in `strings`.
pub fn enumerate_regexes(config: &GrammarConfig, strings: &[String]) -> Vec<Regex> {
    let programs = config.enumerate();
    let b = behaviors(&programs, strings);
    dedupe_by_behavior(&programs, &b)
}

/// Strings as rows, programs as columns. Strings no program matches are
/// dropped; a program matching none of the strings is an error.
pub fn regex_lexicon(programs: &[Regex], strings: &[String]) -> Result<Lexicon> {
    let cols = behaviors(programs, strings);
    let mut rows: Vec<BitSet> = vec![BitSet::new(programs.len()); strings.len()];
    for (w, col) in cols.iter().enumerate() {
        for u in col.iter() {
            rows[u].insert(w);
        }
    }
    let keep: Vec<usize> = (0..strings.len()).filter(|&u| !rows[u].is_empty()).collect();
    Lexicon::from_rows(
        keep.iter().map(|&u| strings[u].clone()).collect(),
        programs.iter().map(|r| alloc::format!("{r}")).collect(),
        keep.iter().map(|&u| rows[u].clone()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use proptest::prelude::*;

    /// Exhaustive backtracking over factor repetition counts.
    fn backtrack(factors: &[Factor], s: &[u8]) -> bool {
        let Some((f, rest)) = factors.split_first() else {
            return s.is_empty();
        };
        let (lo, hi) = f.quantifier.bounds();
        let hi = hi.unwrap_or(s.len());
        (lo..=hi).any(|k| k <= s.len() && s[..k].iter().all(|&c| c == f.atom) && backtrack(rest, &s[k..]))
    }

    fn all_strings(max_len: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        for len in 1..=max_len {
            for bits in 0..(1u32 << len) {
                out.push((0..len).map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect());
            }
        }
        out
    }

    #[test]
    fn toy_examples() {
        let p = Regex::parse("0+1{1}").unwrap();
        assert!(p.is_match("01"));
        assert!(!p.is_match(""));
        let q = Regex::parse("0+1*").unwrap();
        assert!(q.is_match("01"));
        assert!(q.is_match("0"));
        assert!(Regex::parse("0{2}1+").unwrap().is_match("001"));
        assert!(!Regex::parse("0{1}").unwrap().is_match("00"));
    }

    #[test]
    fn parse_print_round_trip() {
        for src in ["0{1}", "0+1{1}", "0{2}1+", "0+1*", "1?0*1{3}"] {
            assert_eq!(Regex::parse(src).unwrap().to_string(), src);
        }
        for bad in ["", "2", "0{", "0{x}", "(0)", "0**", "0{0}"] {
            assert!(Regex::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn nfa_agrees_with_backtracking() {
        let strings = all_strings(8);
        for re in GrammarConfig::small().enumerate() {
            let nfa = re.compile();
            for s in &strings {
                assert_eq!(nfa.is_match(s.as_bytes()), backtrack(&re.factors, s.as_bytes()), "{re} on {s:?}");
            }
        }
    }

    #[test]
    fn adversarial_input_is_linear() {
        let src = "0*".repeat(40) + "1";
        let re = Regex::parse(&src).unwrap();
        let input = "0".repeat(20_000);
        // exponential backtracking would never finish; the NFA sees 80 states per byte
        let nfa = re.compile();
        assert!(nfa.len() < 100);
        assert!(!nfa.is_match(input.as_bytes()));
        assert!(nfa.is_match((input + "1").as_bytes()));
    }

    #[test]
    fn grammar_sizes() {
        assert_eq!(GrammarConfig::small().enumerate().len(), 2 * (6 + 6 * 5 + 6 * 25));
        assert_eq!(GrammarConfig::large().enumerate().len(), 2 * (7 + 7 * 6 + 7 * 36 + 7 * 216));
    }

    #[test]
    fn toy_lexicon_rows() {
        let programs: Vec<Regex> = ["0{1}", "0+1{1}", "0{2}1+", "0+1*"].iter().map(|s| Regex::parse(s).unwrap()).collect();
        let strings: Vec<String> = ["01", "001", "0", "1"].iter().map(|s| s.to_string()).collect();
        let lex = regex_lexicon(&programs, &strings).unwrap();
        assert_eq!(lex.utterances(), &["01", "001", "0"]);
        let rows: Vec<Vec<usize>> = (0..3).map(|u| lex.row(u).to_vec()).collect();
        assert_eq!(rows, vec![vec![1, 3], vec![1, 2, 3], vec![0, 3]]);
    }

    #[test]
    fn sample_is_deterministic_and_covers() {
        let programs = GrammarConfig::small().enumerate();
        let a = sample_strings(&programs, 2000, 20, 0).unwrap();
        let b = sample_strings(&programs, 2000, 20, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2000);
        assert!(a.contains(&String::new()));
        assert!(a.iter().all(|s| s.len() <= 20 && s.bytes().all(|c| c == b'0' || c == b'1')));
        let mut sorted = a.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 2000);
        let lex = regex_lexicon(&enumerate_regexes(&GrammarConfig::small(), &a), &a).unwrap();
        assert_eq!(lex.m(), 2000);
    }

    #[test]
    fn short_strings_cannot_fill_large_samples() {
        let programs = GrammarConfig::small().enumerate();
        assert!(matches!(
            sample_strings(&programs, 2000, 12, 0),
            Err(Error::InsufficientStrings { requested: 2000, .. })
        ));
        let long = [Regex::parse("0{4}").unwrap()];
        assert!(matches!(sample_strings(&long, 10, 3, 0), Err(Error::CoverageImpossible(_))));
    }

    #[test]
    fn dedupe_keeps_shortest_source() {
        let programs: Vec<Regex> = ["0{1}", "0", "0?0", "1"].iter().map(|s| Regex::parse(s).unwrap()).collect();
        let strings = all_strings(4);
        let kept = enumerate_like(&programs, &strings);
        let srcs: Vec<String> = kept.iter().map(|r| r.to_string()).collect();
        assert_eq!(srcs, vec!["0", "1", "0?0"]);
    }

    fn enumerate_like(programs: &[Regex], strings: &[String]) -> Vec<Regex> {
        dedupe_by_behavior(programs, &behaviors(programs, strings))
    }

    #[test]
    fn large_contains_small_classes() {
        let programs = GrammarConfig::large().enumerate();
        let strings = sample_strings(&programs, 600, 20, 1).unwrap();
        let large: alloc::collections::BTreeSet<BitSet> =
            behaviors(&enumerate_regexes(&GrammarConfig::large(), &strings), &strings).into_iter().collect();
        let small = behaviors(&enumerate_regexes(&GrammarConfig::small(), &strings), &strings);
        assert!(small.iter().all(|b| large.contains(b)));
    }

    #[test]
    fn encodings_are_one_hot_and_injective() {
        let cfg = GrammarConfig::large();
        let mut seen = alloc::collections::BTreeSet::new();
        for re in cfg.enumerate() {
            let v = cfg.encode(&re).unwrap();
            assert_eq!(v.len(), cfg.encoding_dim());
            assert_eq!(v.iter().sum::<f64>(), (2 + cfg.max_factors) as f64);
            assert!(seen.insert(format!("{v:?}")));
        }
        assert!(cfg.encode(&Regex::parse("00").unwrap()).is_err());
        assert!(GrammarConfig::small().encode(&Regex::parse("0{4}").unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn random_regexes_match_like_backtracking(
            factors in proptest::collection::vec((0u8..2, 0usize..5, 1u8..4), 1..6),
            s in "[01]{0,10}",
        ) {
            let qs = [Quantifier::One, Quantifier::Star, Quantifier::Plus, Quantifier::Optional];
            let factors: Vec<Factor> = factors.into_iter().map(|(a, q, n)| Factor {
                atom: b'0' + a,
                quantifier: if q == 4 { Quantifier::Exactly(n) } else { qs[q] },
            }).collect();
            let re = Regex::new(factors.clone()).unwrap();
            prop_assert_eq!(re.is_match(&s), backtrack(&factors, s.as_bytes()));
            prop_assert_eq!(Regex::parse(&re.to_string()).unwrap(), re.clone());
            prop_assert!(re.is_match(&re.shortest_match()));
        }
    }
}
