//! Neural distillation plumbing: target-disjoint train/validation splits.

use std::collections::BTreeSet;

use pragrank_core::neural::{Ensemble, Features, TrainConfig};
use pragrank_core::ranking::RankingDataset;
use pragrank_core::GlobalRanking;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::parallel;

/// Splits records by target so no program is a target on both sides; about
/// `validation_fraction` of the targets go to validation.
pub fn split_by_target(dataset: &RankingDataset, validation_fraction: f64, seed: u64) -> (RankingDataset, RankingDataset) {
    let mut targets: Vec<usize> = dataset.records.iter().map(|r| r.target).collect::<BTreeSet<_>>().into_iter().collect();
    targets.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = ((targets.len() as f64 * validation_fraction.clamp(0.0, 1.0)).round() as usize).min(targets.len().saturating_sub(1));
    let validation: BTreeSet<usize> = targets[..take].iter().copied().collect();
    let (val, train): (Vec<_>, Vec<_>) = dataset.records.iter().cloned().partition(|r| validation.contains(&r.target));
    (RankingDataset { records: train }, RankingDataset { records: val })
}

/// Trains the ensemble and caches its scores as a global ranking.
pub fn distill_neural(
    features: &Features,
    dataset: &RankingDataset,
    config: &TrainConfig,
    validation_fraction: f64,
) -> Result<(Ensemble, GlobalRanking)> {
    let (train, validation) = split_by_target(dataset, validation_fraction, config.seed);
    let ensemble = parallel::train_scorer(features, &train, &validation, config)?;
    let ranking = ensemble.to_ranking(features)?;
    Ok((ensemble, ranking))
}
