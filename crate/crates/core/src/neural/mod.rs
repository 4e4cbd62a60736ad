//! Learned example-agnostic program scores.
//!
//! A network maps a program's encoding to a scalar and is trained so that, for
//! pairs drawn from the listener's rankings, the preferred program scores
//! higher. Ten independently seeded networks are averaged after each is
//! standardized on the validation programs.

mod mlp;

pub use mlp::{Adam, Mlp, Trace};

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::order::{rank_descending, Scored};
use crate::ranking::{GlobalRanking, RankingDataset};

/// Probability floor applied inside the pairwise loss.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Dense encodings for hypotheses `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    dim: usize,
    data: Vec<f64>,
}

impl Features {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, w: usize) -> &[f64] {
        &self.data[w * self.dim..(w + 1) * self.dim]
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `−ln sig(gap)` for `gap = s(preferred) − s(other)`, with the probability
/// floored at [`PROBABILITY_FLOOR`].
pub fn pairwise_loss(gap: f64) -> f64 {
    // −ln sig(g) = ln(1 + e^{−g}), evaluated without overflow
    let softplus = if gap > 0.0 {
        libm::log1p(libm::exp(-gap))
    } else {
        -gap + libm::log1p(libm::exp(gap))
    };
    softplus.min(-libm::log(PROBABILITY_FLOOR))
}

/// `d pairwise_loss / d gap = −sig(−gap)`; zero where the floor is active.
pub fn pairwise_loss_grad(gap: f64) -> f64 {
    if sigmoid(gap) < PROBABILITY_FLOOR {
        0.0
    } else {
        -sigmoid(-gap)
    }
}

/// One network plus the constants standardizing its output.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreNet {
    pub mlp: Mlp,
    pub mean: f64,
    pub std: f64,
}

impl ScoreNet {
    pub fn new(mlp: Mlp, mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidArgument("normalization needs finite mean and positive std".into()));
        }
        Ok(Self { mlp, mean, std })
    }

    pub fn raw(&self, x: &[f64]) -> f64 {
        self.mlp.forward(x)
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        (self.raw(x) - self.mean) / self.std
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub nets: Vec<ScoreNet>,
}

impl Ensemble {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.nets.iter().map(|n| n.score(x)).sum::<f64>() / self.nets.len() as f64
    }

    pub fn scores(&self, features: &Features) -> Vec<f64> {
        (0..features.len()).map(|w| self.score(features.row(w))).collect()
    }

    /// Precomputes every score once; `rank_listener` over the result behaves
    /// exactly like [`ensemble_rank_listener`].
    pub fn to_ranking(&self, features: &Features) -> Result<GlobalRanking> {
        GlobalRanking::from_scores(self.scores(features))
    }
}

/// Scores the consistent set on the fly and returns its best `k`.
pub fn ensemble_rank_listener(
    ensemble: &Ensemble,
    features: &Features,
    lex: &Lexicon,
    us: &[usize],
    k: usize,
) -> Result<Vec<Scored>> {
    lex.check_utterances(us)?;
    let consistent = lex.consistent_set(us);
    if consistent.is_empty() {
        return Err(Error::NoConsistentProgram);
    }
    let scored = consistent
        .iter()
        .map(|w| Scored {
            hypothesis: w,
            score: ensemble.score(features.row(w)),
        })
        .collect();
    let mut top = rank_descending(scored);
    top.truncate(k);
    Ok(top)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub ensemble_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 128, 128],
            epochs: 20,
            batch_size: 32,
            learning_rate: 1e-3,
            ensemble_size: 10,
            seed: 0,
        }
    }
}

/// Fraction of validation targets for which some record's top-1 under `scores`
/// (lowest index on ties) is the target.
pub fn validation_accuracy(scores: &[f64], validation: &RankingDataset) -> f64 {
    let targets: BTreeSet<usize> = validation.records.iter().map(|r| r.target).collect();
    if targets.is_empty() {
        return 0.0;
    }
    let solved: BTreeSet<usize> = validation
        .records
        .iter()
        .filter(|r| {
            let best = r
                .ranking
                .iter()
                .copied()
                .max_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a)));
            best == Some(r.target)
        })
        .map(|r| r.target)
        .collect();
    solved.len() as f64 / targets.len() as f64
}

fn check_inputs(features: &Features, train: &RankingDataset, validation: &RankingDataset) -> Result<()> {
    let bound = train.hypothesis_bound().max(validation.hypothesis_bound());
    if bound > features.len() {
        return Err(Error::IndexOutOfRange {
            what: "hypotheses",
            index: bound - 1,
            len: features.len(),
        });
    }
    if !train.records.iter().any(|r| r.ranking.len() >= 2) {
        return Err(Error::DegenerateData);
    }
    let train_targets: BTreeSet<usize> = train.records.iter().map(|r| r.target).collect();
    if validation.records.iter().any(|r| train_targets.contains(&r.target)) {
        return Err(Error::InvalidArgument("training and validation targets overlap".into()));
    }
    Ok(())
}

/// Trains one network; keeps the epoch with the best validation accuracy
/// (earliest on ties) and standardizes on the programs validation ranks.
pub fn train_net(
    features: &Features,
    train: &RankingDataset,
    validation: &RankingDataset,
    config: &TrainConfig,
    seed: u64,
) -> Result<ScoreNet> {
    check_inputs(features, train, validation)?;
    if config.batch_size == 0 || config.epochs == 0 {
        return Err(Error::InvalidArgument("batch size and epochs must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = vec![features.dim()];
    sizes.extend(&config.hidden);
    sizes.push(1);
    let mut mlp = Mlp::new(&sizes, &mut rng)?;
    let mut adam = Adam::new(mlp.params().len(), config.learning_rate);
    let mut grad = vec![0.0; mlp.params().len()];
    let (mut t_better, mut t_worse) = (Trace::default(), Trace::default());

    let mut records: Vec<&[usize]> = train
        .records
        .iter()
        .map(|r| r.ranking.as_slice())
        .filter(|r| r.len() >= 2)
        .collect();
    let eval_set: Vec<usize> = if validation.is_empty() {
        (0..features.len()).collect()
    } else {
        validation
            .records
            .iter()
            .flat_map(|r| r.ranking.iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    };
    let all_scores = |mlp: &Mlp| -> Vec<f64> {
        let mut s = vec![0.0; features.len()];
        for &w in &eval_set {
            s[w] = mlp.forward(features.row(w));
        }
        s
    };

    let mut best: Option<(f64, Mlp)> = None;
    for _ in 0..config.epochs {
        records.shuffle(&mut rng);
        for batch in records.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for ranking in batch {
                let picked = sample(&mut rng, ranking.len(), 2);
                let (i, j) = (picked.index(0).min(picked.index(1)), picked.index(0).max(picked.index(1)));
                let sb = mlp.forward_traced(features.row(ranking[i]), &mut t_better);
                let sw = mlp.forward_traced(features.row(ranking[j]), &mut t_worse);
                let d = pairwise_loss_grad(sb - sw) / batch.len() as f64;
                mlp.backward(&t_better, d, &mut grad);
                mlp.backward(&t_worse, -d, &mut grad);
            }
            adam.step(mlp.params_mut(), &grad);
        }
        let accuracy = if validation.is_empty() {
            0.0
        } else {
            validation_accuracy(&all_scores(&mlp), validation)
        };
        if best.as_ref().map_or(true, |(a, _)| accuracy > *a || validation.is_empty()) {
            best = Some((accuracy, mlp.clone()));
        }
    }
    let mlp = best.expect("at least one epoch").1;
    let scores = all_scores(&mlp);
    let values: Vec<f64> = eval_set.iter().map(|&w| scores[w]).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    let std = libm::sqrt(var);
    ScoreNet::new(mlp, mean, if std > 0.0 { std } else { 1.0 })
}

/// `config.ensemble_size` networks seeded `config.seed, config.seed + 1, …`.
pub fn train_scorer(
    features: &Features,
    train: &RankingDataset,
    validation: &RankingDataset,
    config: &TrainConfig,
) -> Result<Ensemble> {
    let nets = (0..config.ensemble_size as u64)
        .map(|i| train_net(features, train, validation, config, config.seed + i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble { nets })
}

/// Fraction of pairs with distinct reference scores that `scores` orders the
/// same way.
pub fn pairwise_agreement(scores: &[f64], reference: &[f64]) -> f64 {
    let mut agree = 0u64;
    let mut total = 0u64;
    for a in 0..reference.len() {
        for b in a + 1..reference.len() {
            if reference[a] == reference[b] {
                continue;
            }
            total += 1;
            if (reference[a] > reference[b]) == (scores[a] > scores[b]) {
                agree += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}
