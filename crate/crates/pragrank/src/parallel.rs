//! Rayon versions of the embarrassingly parallel pipelines. Each returns
//! exactly what its sequential counterpart in `pragrank_core` returns.

use pragrank_core::domains::regex::{behaviors, dedupe_by_behavior, GrammarConfig, Regex};
use pragrank_core::eval::{
    exists_lexicon, replay, stability_sample, Clock, ExistsConfig, ExistsReport, Listener, ReplayTrace, StabilityCell,
    StabilityConfig, TurnResult,
};
use pragrank_core::neural::{train_net, Ensemble, Features, TrainConfig};
use pragrank_core::ranking::{records_for_target, RankingDataset};
use pragrank_core::{Error as CoreError, Lexicon, Prior};
use rayon::prelude::*;

use crate::error::Result;

pub fn generate_dataset(lex: &Lexicon, prior: &Prior, targets: &[usize], n: usize) -> Result<RankingDataset> {
    let per_target = targets
        .par_iter()
        .map(|&w| records_for_target(lex, prior, w, n))
        .collect::<Result<Vec<_>, CoreError>>()?;
    Ok(RankingDataset {
        records: per_target.into_iter().flatten().collect(),
    })
}

pub fn exp_ranking_exists(config: &ExistsConfig) -> Result<ExistsReport> {
    let results = (0..config.lexicons)
        .into_par_iter()
        .map(|i| exists_lexicon(config, i))
        .collect::<Result<Vec<_>, CoreError>>()?;
    Ok(ExistsReport::from_results(results))
}

pub fn exp_stability(config: &StabilityConfig) -> Result<Vec<StabilityCell>> {
    if config.iters < 2 {
        return Err(CoreError::InvalidArgument("stability needs at least two iterations".into()).into());
    }
    let cells: Vec<(f64, usize)> = config
        .p_trues
        .iter()
        .flat_map(|&p| config.sizes.iter().map(move |&s| (p, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(p, size)| {
            let samples = (0..config.per_cell)
                .into_par_iter()
                .map(|i| stability_sample(p, size, i, config.iters, config.seed))
                .collect::<Result<Vec<_>, CoreError>>()?;
            Ok(StabilityCell::from_samples(p, size, samples, config.resamples, config.seed))
        })
        .collect()
}

/// One worker per ensemble member; member `i` is seeded `config.seed + i`.
pub fn train_scorer(
    features: &Features,
    train: &RankingDataset,
    validation: &RankingDataset,
    config: &TrainConfig,
) -> Result<Ensemble> {
    let nets = (0..config.ensemble_size as u64)
        .into_par_iter()
        .map(|i| train_net(features, train, validation, config, config.seed + i))
        .collect::<Result<Vec<_>, CoreError>>()?;
    Ok(Ensemble { nets })
}

pub fn enumerate_regexes(config: &GrammarConfig, strings: &[String]) -> Vec<Regex> {
    let programs = config.enumerate();
    let b = programs
        .par_chunks(256)
        .flat_map_iter(|chunk| behaviors(chunk, strings))
        .collect::<Vec<_>>();
    dedupe_by_behavior(&programs, &b)
}

/// Success-only replays (no timing) of every trace.
pub fn replay_traces(traces: &[ReplayTrace], listener: &(dyn Listener + Sync), k: usize) -> Vec<TurnResult> {
    struct Untimed;
    impl Clock for Untimed {
        fn now_nanos(&self) -> u64 {
            0
        }
    }
    traces.par_iter().map(|t| replay(t, listener, k, &Untimed)).collect()
}
