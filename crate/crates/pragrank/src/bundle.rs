//! Domains and the artifact bundles the service and benches run on: programs,
//! their lexicon, and a distilled global ranking.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use pragrank_core::domains::animals::{animals_lexicon, enumerate_animals, AnimalsProgram, Grid, Reveal};
use pragrank_core::domains::regex::{regex_lexicon, sample_strings, GrammarConfig, Regex};
use pragrank_core::neural::Features;
use pragrank_core::ranking::{anneal_ranking, AnnealConfig};
use pragrank_core::{BitSet, GlobalRanking, Lexicon, Prior};

use crate::error::{Error, Result};
use crate::formats::{
    format_lexicon, format_ranking, load_lexicon, parse_ranking, read_text, ranking_for_lexicon, write_text,
};
use crate::parallel;

pub const LEXICON_FILE: &str = "lexicon.praglex";
pub const SIGMA_FILE: &str = "sigma.rank";
pub const STIMULI_FILE: &str = "stimuli.txt";

/// Longest string example accepted from a client.
pub const MAX_EXAMPLE_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    RegexSmall,
    RegexLarge,
    Animals,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::RegexSmall, Domain::RegexLarge, Domain::Animals];

    pub fn name(self) -> &'static str {
        match self {
            Domain::RegexSmall => "regex-small",
            Domain::RegexLarge => "regex-large",
            Domain::Animals => "animals",
        }
    }

    pub fn grammar(self) -> Option<GrammarConfig> {
        match self {
            Domain::RegexSmall => Some(GrammarConfig::small()),
            Domain::RegexLarge => Some(GrammarConfig::large()),
            Domain::Animals => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDomain(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerateConfig {
    /// Size of the string sample (regex domains).
    pub strings: usize,
    pub l_max: usize,
    pub seed: u64,
}

impl Default for EnumerateConfig {
    fn default() -> Self {
        Self {
            strings: 2000,
            l_max: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Programs {
    Regex(Vec<Regex>),
    Animals(Vec<AnimalsProgram>),
}

impl Programs {
    pub fn len(&self) -> usize {
        match self {
            Programs::Regex(p) => p.len(),
            Programs::Animals(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parse_ids(domain: Domain, ids: &[String]) -> Result<Self> {
        Ok(match domain {
            Domain::Animals => Programs::Animals(ids.iter().map(|id| AnimalsProgram::parse(id)).collect::<Result<_, _>>()?),
            _ => Programs::Regex(ids.iter().map(|id| Regex::parse(id)).collect::<Result<_, _>>()?),
        })
    }

    pub fn id(&self, w: usize) -> String {
        match self {
            Programs::Regex(p) => p[w].to_string(),
            Programs::Animals(p) => p[w].to_string(),
        }
    }

    /// What a participant sees: regex source, or the rendered 7×7 grid.
    pub fn render(&self, w: usize) -> String {
        match self {
            Programs::Regex(p) => p[w].to_string(),
            Programs::Animals(p) => p[w].render().to_string(),
        }
    }

    /// Production-choice encodings, one row per program.
    pub fn features(&self, domain: Domain) -> Result<Features> {
        let rows = match self {
            Programs::Regex(p) => {
                let grammar = domain
                    .grammar()
                    .ok_or_else(|| Error::Format(format!("{domain} has no regex grammar")))?;
                p.iter().map(|re| grammar.encode(re)).collect::<Result<Vec<_>, _>>()?
            }
            Programs::Animals(p) => p.iter().map(|a| a.encode()).collect(),
        };
        Ok(Features::from_rows(rows)?)
    }
}

pub struct Enumerated {
    pub domain: Domain,
    pub programs: Programs,
    pub lexicon: Lexicon,
    pub syntactic_count: usize,
    /// Rendered patterns, animals only.
    pub patterns: Vec<Grid>,
}

pub fn enumerate_domain(domain: Domain, config: &EnumerateConfig) -> Result<Enumerated> {
    match domain.grammar() {
        Some(grammar) => {
            let syntactic = grammar.enumerate();
            let strings = sample_strings(&syntactic, config.strings, config.l_max, config.seed)?;
            let programs = parallel::enumerate_regexes(&grammar, &strings);
            let lexicon = regex_lexicon(&programs, &strings)?;
            Ok(Enumerated {
                domain,
                syntactic_count: syntactic.len(),
                programs: Programs::Regex(programs),
                lexicon,
                patterns: Vec::new(),
            })
        }
        None => {
            let e = enumerate_animals();
            let lexicon = animals_lexicon(&e.programs, &e.patterns)?;
            Ok(Enumerated {
                domain,
                syntactic_count: e.syntactic_count,
                programs: Programs::Animals(e.programs),
                lexicon,
                patterns: e.patterns,
            })
        }
    }
}

/// Why a client example cannot be used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExampleError {
    Malformed(String),
}

pub struct Bundle {
    pub domain: Domain,
    pub programs: Programs,
    pub lexicon: Lexicon,
    pub prior: Prior,
    pub sigma: GlobalRanking,
    /// Programs sessions may use as targets.
    pub stimuli: Vec<usize>,
}

impl Bundle {
    pub fn new(domain: Domain, lexicon: Lexicon, sigma: GlobalRanking) -> Result<Self> {
        if sigma.len() != lexicon.n() {
            return Err(Error::Format(format!(
                "ranking covers {} programs, lexicon has {}",
                sigma.len(),
                lexicon.n()
            )));
        }
        let programs = Programs::parse_ids(domain, lexicon.hypotheses())?;
        Ok(Self {
            domain,
            programs,
            prior: Prior::uniform(lexicon.n()),
            stimuli: (0..lexicon.n()).collect(),
            lexicon,
            sigma,
        })
    }

    /// Enumerates the domain and distills σ by annealing on greedy-speaker
    /// records of length `n` for every program.
    pub fn build(domain: Domain, config: &EnumerateConfig, n: usize, anneal: &AnnealConfig) -> Result<Self> {
        let e = enumerate_domain(domain, config)?;
        let prior = Prior::uniform(e.lexicon.n());
        let targets: Vec<usize> = (0..e.lexicon.n()).collect();
        let dataset = parallel::generate_dataset(&e.lexicon, &prior, &targets, n)?;
        let sigma = anneal_ranking(&dataset, e.lexicon.n(), anneal)?.ranking;
        Bundle::new(domain, e.lexicon, sigma)
    }

    /// Reads `lexicon.praglex`, `sigma.rank` and the optional `stimuli.txt`
    /// (program ids, one per line) from `dir`.
    pub fn load(dir: &Path, domain: Domain) -> Result<Self> {
        let lexicon = load_lexicon(&dir.join(LEXICON_FILE))?;
        let sigma_path = dir.join(SIGMA_FILE);
        let sigma = ranking_for_lexicon(&parse_ranking(&read_text(&sigma_path)?).map_err(|e| e.in_file(&sigma_path))?, &lexicon)
            .map_err(|e| e.in_file(&sigma_path))?;
        let mut bundle = Bundle::new(domain, lexicon, sigma)?;
        let stimuli_path = dir.join(STIMULI_FILE);
        if stimuli_path.exists() {
            let text = read_text(&stimuli_path)?;
            bundle.stimuli = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.is_empty())
                .map(|(i, id)| {
                    bundle
                        .lexicon
                        .hypothesis_index(id)
                        .ok_or_else(|| Error::parse(i + 1, format!("unknown program `{id}`")).in_file(&stimuli_path))
                })
                .collect::<Result<_>>()?;
            if bundle.stimuli.is_empty() {
                return Err(Error::Format("empty stimulus list".into()).in_file(&stimuli_path));
            }
        }
        Ok(bundle)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join(LEXICON_FILE), &format_lexicon(&self.lexicon)?)?;
        write_text(&dir.join(SIGMA_FILE), &format_ranking(&self.sigma, self.lexicon.hypotheses())?)?;
        if self.stimuli.len() != self.lexicon.n() {
            let ids: String = self.stimuli.iter().map(|&w| format!("{}\n", self.lexicon.hypothesis_id(w))).collect();
            write_text(&dir.join(STIMULI_FILE), &ids)?;
        }
        Ok(())
    }

    /// Canonical text of an example, if it is well formed for the domain.
    pub fn canonical_example(&self, text: &str) -> Result<String, ExampleError> {
        match self.programs {
            Programs::Regex(_) => {
                if text.len() > MAX_EXAMPLE_LEN {
                    return Err(ExampleError::Malformed(format!("examples are at most {MAX_EXAMPLE_LEN} characters")));
                }
                if let Some(c) = text.chars().find(|c| *c != '0' && *c != '1') {
                    return Err(ExampleError::Malformed(format!("unexpected character {c:?}; use 0 and 1")));
                }
                Ok(text.to_string())
            }
            Programs::Animals(_) => Reveal::parse(text)
                .map(|r| r.to_string())
                .map_err(|_| ExampleError::Malformed("expected a reveal `x:y:cell`, e.g. `3:4:Cr`".into())),
        }
    }

    /// Programs consistent with a well-formed example. Examples outside the
    /// lexicon's sample are evaluated directly against every program.
    pub fn example_row(&self, text: &str) -> Result<BitSet, ExampleError> {
        let text = self.canonical_example(text)?;
        if let Some(u) = self.lexicon.utterance_index(&text) {
            return Ok(self.lexicon.row(u).clone());
        }
        let n = self.lexicon.n();
        Ok(match &self.programs {
            Programs::Regex(p) => BitSet::from_indices(n, (0..n).filter(|&w| p[w].is_match(&text))),
            Programs::Animals(p) => {
                let reveal = Reveal::parse(&text).expect("canonical");
                BitSet::from_indices(n, (0..n).filter(|&w| reveal.is_consistent(&p[w])))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_names_round_trip() {
        for d in Domain::ALL {
            assert_eq!(d.name().parse::<Domain>().unwrap(), d);
        }
        assert!(matches!("regex".parse::<Domain>(), Err(Error::UnknownDomain(_))));
    }

    #[test]
    fn small_bundle_save_load_and_examples() {
        let cfg = EnumerateConfig::default();
        let anneal = AnnealConfig {
            validation_every: 2000,
            ..AnnealConfig::default()
        };
        let mut bundle = Bundle::build(Domain::RegexSmall, &cfg, 1, &anneal).unwrap();
        assert_eq!(bundle.lexicon.n(), 372);
        bundle.stimuli = vec![3, 5, 8];
        let dir = tempfile::tempdir().unwrap();
        bundle.save(dir.path()).unwrap();
        let back = Bundle::load(dir.path(), Domain::RegexSmall).unwrap();
        assert_eq!(back.lexicon, bundle.lexicon);
        assert_eq!(back.sigma.order(), bundle.sigma.order());
        assert_eq!(back.stimuli, vec![3, 5, 8]);

        // a sampled string reuses its lexicon row; a fresh one is evaluated
        let u = back.lexicon.utterance_index("01").unwrap();
        assert_eq!(&back.example_row("01").unwrap(), back.lexicon.row(u));
        let long = "0".repeat(40);
        assert!(back.lexicon.utterance_index(&long).is_none());
        let row = back.example_row(&long).unwrap();
        let Programs::Regex(p) = &back.programs else { unreachable!() };
        assert_eq!(row.to_vec(), (0..p.len()).filter(|&w| p[w].is_match(&long)).collect::<Vec<_>>());
        assert!(row.count() > 0);
        assert!(matches!(back.example_row("012"), Err(ExampleError::Malformed(_))));
        assert!(matches!(back.example_row(&"1".repeat(65)), Err(ExampleError::Malformed(_))));
        assert_eq!(back.programs.features(Domain::RegexSmall).unwrap().len(), 372);
    }
}
