//! Distilling a dataset of partial rankings into one global order by random
//! pairwise repair.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ranking::{GlobalRanking, RankingDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnealConfig {
    /// Iterations per window.
    pub validation_every: u64,
    /// Number of recent windows inspected for convergence.
    pub patience: usize,
    /// Converged once the spread of recent window swap counts drops below this.
    pub threshold: u64,
    pub max_iterations: u64,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            validation_every: 10_000,
            patience: 5,
            threshold: 10,
            max_iterations: 10_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub ranking: GlobalRanking,
    /// False when the iteration cap was hit; `ranking` is then the order at
    /// the end of the quietest window seen.
    pub converged: bool,
    pub iterations: u64,
    pub window_swaps: Vec<u64>,
}

/// Starts from a random permutation, repeatedly samples a record and two of
/// its programs, and swaps their global positions whenever the global order
/// disagrees with the record.
pub fn anneal_ranking(dataset: &RankingDataset, n: usize, config: &AnnealConfig) -> Result<AnnealOutcome> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("annealing needs a non-empty dataset".into()));
    }
    if config.validation_every == 0 || config.patience == 0 {
        return Err(Error::InvalidArgument("validation interval and patience must be positive".into()));
    }
    if dataset.hypothesis_bound() > n {
        return Err(Error::IndexOutOfRange {
            what: "hypotheses",
            index: dataset.hypothesis_bound() - 1,
            len: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut position = alloc::vec![0usize; n];
    for (rank, &w) in order.iter().enumerate() {
        position[w] = rank;
    }

    let informative: Vec<&[usize]> = dataset
        .records
        .iter()
        .map(|r| r.ranking.as_slice())
        .filter(|r| r.len() >= 2)
        .collect();
    let mut window_swaps = Vec::new();
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut iterations = 0u64;
    let mut swaps = 0u64;

    if informative.is_empty() {
        return Ok(AnnealOutcome {
            ranking: GlobalRanking::from_order(order)?,
            converged: true,
            iterations: 0,
            window_swaps,
        });
    }

    while iterations < config.max_iterations {
        let record = informative[rng.gen_range(0..informative.len())];
        let picked = sample(&mut rng, record.len(), 2);
        let (i, j) = (picked.index(0).min(picked.index(1)), picked.index(0).max(picked.index(1)));
        let (better, worse) = (record[i], record[j]);
        if position[better] > position[worse] {
            order.swap(position[better], position[worse]);
            position.swap(better, worse);
            swaps += 1;
        }
        iterations += 1;

        if iterations % config.validation_every == 0 {
            window_swaps.push(swaps);
            if best.as_ref().map_or(true, |(s, _)| swaps < *s) {
                best = Some((swaps, order.clone()));
            }
            swaps = 0;
            if window_swaps.len() >= config.patience {
                let recent = &window_swaps[window_swaps.len() - config.patience..];
                let spread = recent.iter().max().unwrap() - recent.iter().min().unwrap();
                if spread < config.threshold {
                    return Ok(AnnealOutcome {
                        ranking: GlobalRanking::from_order(order)?,
                        converged: true,
                        iterations,
                        window_swaps,
                    });
                }
            }
        }
    }
    let order = best.map_or(order, |(_, o)| o);
    Ok(AnnealOutcome {
        ranking: GlobalRanking::from_order(order)?,
        converged: false,
        iterations,
        window_swaps,
    })
}
