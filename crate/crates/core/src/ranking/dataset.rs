//! Simulated speaker/listener interactions and the pairwise conflicts they contain.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_index, Error, Result};
use crate::lexicon::Lexicon;
use crate::order::{rank_descending, Scored};
use crate::rsa::{rsa_chain, IncrementalRsa, Prior};

/// One simulated interaction: the target, the examples shown so far and the
/// listener's full best-first ranking of the programs consistent with them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub target: usize,
    pub utterances: Vec<usize>,
    pub ranking: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankingDataset {
    pub records: Vec<Record>,
}

impl RankingDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest hypothesis index mentioned, plus one.
    pub fn hypothesis_bound(&self) -> usize {
        self.records
            .iter()
            .flat_map(|r| r.ranking.iter().copied().chain([r.target]))
            .max()
            .map_or(0, |w| w + 1)
    }
}

/// The `n` records produced while the greedy speaker describes `w`: after each
/// new utterance, the exact pragmatic listener's ranking of the survivors.
pub fn records_for_target(lex: &Lexicon, prior: &Prior, w: usize, n: usize) -> Result<Vec<Record>> {
    if n == 0 {
        return Err(Error::InvalidArgument("dataset needs at least one utterance per target".into()));
    }
    check_index("hypotheses", w, lex.n())?;
    let mut session = IncrementalRsa::new(lex, prior)?;
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let u = session.best_next_utterance(w)?;
        session.push(u)?;
        let ranking = session.ranked(usize::MAX)?.into_iter().map(|s| s.hypothesis).collect();
        records.push(Record {
            target: w,
            utterances: session.prefix().to_vec(),
            ranking,
        });
    }
    Ok(records)
}

/// Records for every target in `targets`, in target order.
pub fn generate_dataset(lex: &Lexicon, prior: &Prior, targets: &[usize], n: usize) -> Result<RankingDataset> {
    let mut records = Vec::with_capacity(targets.len() * n);
    for &w in targets {
        records.extend(records_for_target(lex, prior, w, n)?);
    }
    Ok(RankingDataset { records })
}

/// One record per utterance holding the depth-1 listener's ranking of its row,
/// so every single-example comparison the lexicon admits is present.
pub fn single_utterance_dataset(lex: &Lexicon, prior: &Prior) -> Result<RankingDataset> {
    let (l1, _) = rsa_chain(lex, prior, 1)?;
    let records = (0..lex.m())
        .filter(|&u| l1.is_row_defined(u))
        .map(|u| {
            let ranking: Vec<usize> = rank_descending(
                lex.row(u)
                    .iter()
                    .map(|w| Scored {
                        hypothesis: w,
                        score: l1.get(u, w),
                    })
                    .collect(),
            )
            .into_iter()
            .map(|s| s.hypothesis)
            .collect();
            Record {
                target: ranking[0],
                utterances: alloc::vec![u],
                ranking,
            }
        })
        .collect();
    Ok(RankingDataset { records })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleReport {
    /// Unordered pairs seen in both orientations.
    pub conflicted_pairs: u64,
    /// Unordered pairs compared by at least one record.
    pub comparable_pairs: u64,
    pub cycle_fraction: f64,
}

/// Exact pairwise conflict count over every pair in every record.
///
/// Memory grows with the number of distinct compared pairs; use
/// [`cycle_report_sampled`] for datasets with very long rankings.
pub fn cycle_report(dataset: &RankingDataset) -> CycleReport {
    let mut oriented: Vec<u64> = Vec::new();
    for record in &dataset.records {
        for (i, &a) in record.ranking.iter().enumerate() {
            for &b in &record.ranking[i + 1..] {
                oriented.push(orient(a, b));
            }
        }
    }
    tally(oriented)
}

/// As [`cycle_report`] but compares at most `pairs_per_record` uniformly drawn
/// position pairs from each record.
pub fn cycle_report_sampled(dataset: &RankingDataset, pairs_per_record: usize, seed: u64) -> CycleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oriented: Vec<u64> = Vec::new();
    for record in &dataset.records {
        let len = record.ranking.len();
        let total = len * len.saturating_sub(1) / 2;
        if total <= pairs_per_record {
            for (i, &a) in record.ranking.iter().enumerate() {
                for &b in &record.ranking[i + 1..] {
                    oriented.push(orient(a, b));
                }
            }
            continue;
        }
        for _ in 0..pairs_per_record {
            let picked = sample(&mut rng, len, 2);
            let (i, j) = (picked.index(0).min(picked.index(1)), picked.index(0).max(picked.index(1)));
            oriented.push(orient(record.ranking[i], record.ranking[j]));
        }
    }
    tally(oriented)
}

/// Packs the unordered pair into the high bits and the orientation into bit 0.
fn orient(better: usize, worse: usize) -> u64 {
    let (lo, hi) = if better < worse { (better, worse) } else { (worse, better) };
    ((lo as u64) << 33) | ((hi as u64) << 1) | u64::from(better > worse)
}

fn tally(mut oriented: Vec<u64>) -> CycleReport {
    oriented.sort_unstable();
    oriented.dedup();
    let mut comparable = 0u64;
    let mut conflicted = 0u64;
    let mut i = 0;
    while i < oriented.len() {
        comparable += 1;
        if i + 1 < oriented.len() && oriented[i] >> 1 == oriented[i + 1] >> 1 {
            conflicted += 1;
            i += 2;
        } else {
            i += 1;
        }
    }
    CycleReport {
        conflicted_pairs: conflicted,
        comparable_pairs: comparable,
        cycle_fraction: if comparable == 0 {
            0.0
        } else {
            conflicted as f64 / comparable as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::sample_random_lexicon;
    use crate::rsa::tests::toy;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn toy_target_records() {
        let lex = toy();
        let prior = Prior::uniform(4);
        let records = records_for_target(&lex, &prior, 1, 2).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            let pos = |w| r.ranking.iter().position(|&x| x == w).unwrap();
            assert!(pos(1) < pos(3), "{r:?}");
            for &w in &r.ranking {
                assert!(r.utterances.iter().all(|&u| lex.is_consistent(u, w)));
            }
        }
        assert_eq!(records[0].utterances, vec![0]);
        assert_eq!(records[1].utterances.len(), 2);
    }

    #[test]
    fn one_record_per_target_at_depth_one() {
        let lex = sample_random_lexicon(10, 10, 0.5, 4).unwrap();
        let prior = Prior::uniform(10);
        let targets: Vec<usize> = (0..10).collect();
        let d = generate_dataset(&lex, &prior, &targets, 1).unwrap();
        assert_eq!(d.len(), 10);
        assert!(d.records.iter().all(|r| r.utterances.len() == 1));
        let d3 = generate_dataset(&lex, &prior, &targets, 3).unwrap();
        assert_eq!(d3.len(), 30);
        assert!(generate_dataset(&lex, &prior, &targets, 0).is_err());
    }

    #[test]
    fn explicit_conflict_is_a_full_cycle() {
        let d = RankingDataset {
            records: vec![
                Record { target: 0, utterances: vec![0], ranking: vec![0, 1] },
                Record { target: 1, utterances: vec![1], ranking: vec![1, 0] },
            ],
        };
        let r = cycle_report(&d);
        assert_eq!((r.conflicted_pairs, r.comparable_pairs), (1, 1));
        assert_eq!(r.cycle_fraction, 1.0);
        assert_eq!(cycle_report_sampled(&d, 1, 0), r);
        assert_eq!(cycle_report(&RankingDataset::default()).cycle_fraction, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn single_utterance_data_has_no_cycles(seed in 0u64..100_000, m in 3usize..15, n in 3usize..15) {
            let Ok(lex) = sample_random_lexicon(m, n, 0.5, seed) else { return Ok(()); };
            let d = single_utterance_dataset(&lex, &Prior::uniform(n)).unwrap();
            prop_assert_eq!(d.len(), m);
            prop_assert_eq!(cycle_report(&d).conflicted_pairs, 0);
        }

        #[test]
        fn records_rank_only_consistent_programs(seed in 0u64..10_000, len in 1usize..4) {
            let lex = sample_random_lexicon(8, 8, 0.5, seed).unwrap();
            let prior = Prior::uniform(8);
            let d = generate_dataset(&lex, &prior, &[0, 3, 7], len).unwrap();
            for r in &d.records {
                prop_assert!(r.ranking.contains(&r.target));
                let consistent = lex.consistent_set(&r.utterances).to_vec();
                let mut sorted = r.ranking.clone();
                sorted.sort_unstable();
                prop_assert_eq!(sorted, consistent);
            }
            let rep = cycle_report(&d);
            prop_assert!((0.0..=1.0).contains(&rep.cycle_fraction));
        }
    }
}
