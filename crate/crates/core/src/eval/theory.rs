use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::eval::bootstrap_mean_ci;
use crate::lexicon::{sample_random_lexicon, Lexicon};
use crate::order::{compare_with_tolerance, TIE_RTOL};
use crate::ranking::{check_global_ranking, extract_ranking_from_chain, Counterexample, GlobalRanking};
use crate::rsa::{rsa_chain, rsa_chain_each, Prior};

/// Independent seed for the `index`-th item of a seeded experiment.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 step so neighbouring indices get unrelated streams
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistsConfig {
    pub lexicons: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub p_true: f64,
    pub depth: usize,
    pub seed: u64,
}

impl Default for ExistsConfig {
    fn default() -> Self {
        Self {
            lexicons: 1000,
            min_size: 10,
            max_size: 20,
            p_true: 0.5,
            depth: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconExists {
    pub index: usize,
    pub shape: (usize, usize),
    /// Depths checked.
    pub checks: usize,
    /// First failing depth and triple, if any.
    pub violation: Option<(usize, Counterexample)>,
}

/// Checks the chain-extracted ranking against `L_1..L_depth`.
pub fn check_lexicon_exists(lex: &Lexicon, depth: usize) -> Result<(usize, Option<(usize, Counterexample)>)> {
    let prior = Prior::uniform(lex.n());
    let mut violation = None;
    let mut checks = 0;
    rsa_chain_each(lex, &prior, depth, |l, nv| {
        let sigma = extract_ranking_from_chain(nv, nv.depth)?;
        checks += 1;
        let check = check_global_ranking(|u, w| l.get(u, w), &sigma, lex);
        if violation.is_none() {
            violation = check.counterexample.map(|c| (nv.depth, c));
        }
        Ok(())
    })?;
    Ok((checks, violation))
}

/// The `index`-th lexicon of the experiment, sized uniformly in the configured range.
pub fn exists_lexicon(config: &ExistsConfig, index: usize) -> Result<LexiconExists> {
    let seed = child_seed(config.seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(config.min_size..=config.max_size);
    let n = rng.gen_range(config.min_size..=config.max_size);
    let lex = sample_random_lexicon(m, n, config.p_true, seed)?;
    let (checks, violation) = check_lexicon_exists(&lex, config.depth)?;
    Ok(LexiconExists {
        index,
        shape: (m, n),
        checks,
        violation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistsReport {
    pub lexicons: usize,
    pub checks: usize,
    pub violations: usize,
    pub first_violation: Option<LexiconExists>,
}

impl ExistsReport {
    pub fn from_results(results: Vec<LexiconExists>) -> Self {
        Self {
            lexicons: results.len(),
            checks: results.iter().map(|r| r.checks).sum(),
            violations: results.iter().filter(|r| r.violation.is_some()).count(),
            first_violation: results.into_iter().find(|r| r.violation.is_some()),
        }
    }
}

pub fn exp_ranking_exists(config: &ExistsConfig) -> Result<ExistsReport> {
    let results = (0..config.lexicons)
        .map(|i| exists_lexicon(config, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExistsReport::from_results(results))
}

/// Fraction of eventually stable pairwise orders that already hold at the
/// first pragmatic listener.
///
/// Orders are read off `σ_{L_j}` for `j = 1..=iters` and "eventually" means
/// "through `iters`". Pairs tied at `iters` (relative [`TIE_RTOL`]) have no
/// stable orientation and are left out; a tie at an earlier depth breaks
/// stability like a reversal does. Returns 1 when no pair is ordered.
pub fn frac_stable(lex: &Lexicon, prior: &Prior, iters: usize) -> Result<f64> {
    let (_, nv) = rsa_chain(lex, prior, iters)?;
    let sigmas: Vec<GlobalRanking> = (1..=iters)
        .map(|j| extract_ranking_from_chain(&nv, j))
        .collect::<Result<_>>()?;
    let n = lex.n();
    let orient = |j: usize, a: usize, b: usize| compare_with_tolerance(sigmas[j].score(a), sigmas[j].score(b), TIE_RTOL);
    let mut stable = 0u64;
    let mut from_first = 0u64;
    for a in 0..n {
        for b in a + 1..n {
            let last = orient(iters - 1, a, b);
            if last == Ordering::Equal {
                continue;
            }
            stable += 1;
            if (0..iters - 1).all(|j| orient(j, a, b) == last) {
                from_first += 1;
            }
        }
    }
    Ok(if stable == 0 {
        1.0
    } else {
        from_first as f64 / stable as f64
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    pub p_trues: Vec<f64>,
    pub sizes: Vec<usize>,
    pub per_cell: usize,
    pub iters: usize,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            p_trues: alloc::vec![0.1, 0.2, 0.5],
            sizes: alloc::vec![10, 20, 50],
            per_cell: 20,
            iters: 100,
            resamples: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCell {
    pub p_true: f64,
    pub size: usize,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl StabilityCell {
    pub fn from_samples(p_true: f64, size: usize, samples: Vec<f64>, resamples: usize, seed: u64) -> Self {
        let mean = samples.iter().sum::<f64>() / samples.len().max(1) as f64;
        let (ci_lo, ci_hi) = bootstrap_mean_ci(&samples, resamples, seed);
        Self {
            p_true,
            size,
            samples,
            mean,
            ci_lo,
            ci_hi,
        }
    }
}

/// frac-stable of the `index`-th square `size × size` lexicon at `p_true`.
pub fn stability_sample(p_true: f64, size: usize, index: usize, iters: usize, seed: u64) -> Result<f64> {
    let cell_seed = child_seed(seed ^ (size as u64) << 32 ^ p_true.to_bits(), index as u64);
    let lex = sample_random_lexicon(size, size, p_true, cell_seed)?;
    frac_stable(&lex, &Prior::uniform(size), iters)
}

pub fn exp_stability(config: &StabilityConfig) -> Result<Vec<StabilityCell>> {
    if config.iters < 2 {
        return Err(crate::Error::InvalidArgument("stability needs at least two iterations".into()));
    }
    let mut cells = Vec::new();
    for &p in &config.p_trues {
        for &size in &config.sizes {
            let samples = (0..config.per_cell)
                .map(|i| stability_sample(p, size, i, config.iters, config.seed))
                .collect::<Result<Vec<_>>>()?;
            cells.push(StabilityCell::from_samples(p, size, samples, config.resamples, config.seed));
        }
    }
    Ok(cells)
}
