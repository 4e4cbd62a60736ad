//! The `pragrank` command line. Exit status: 0 on success, 1 on usage
//! errors, 2 on data errors.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use pragrank_core::eval::{
    simulate_traces, success_curve, ExactL1, ExistsConfig, Listener, RankListener, ReplayTrace, StabilityConfig,
};
use pragrank_core::lexicon::sample_random_lexicon;
use pragrank_core::neural::TrainConfig;
use pragrank_core::order::{rank_descending, Scored};
use pragrank_core::ranking::{anneal_ranking, cycle_report, cycle_report_sampled, AnnealConfig, Record, RankingDataset};
use pragrank_core::rsa::{incremental_pragmatic_listener, rsa_chain};
use pragrank_core::{GlobalRanking, Lexicon, Prior};

use crate::bench::{bench, curve_csv, timing_csv};
use crate::bundle::{enumerate_domain, Bundle, Domain, EnumerateConfig, Programs};
use crate::distill::distill_neural;
use crate::error::Error;
use crate::formats::{
    encode_model, format_dataset, format_lexicon, format_patterns, format_program_list, format_ranking,
    format_traces, load_lexicon, parse_dataset, parse_dataset_ids, parse_ranking, parse_traces, ranking_for_lexicon,
    read_text, write_bytes, write_text,
};
use crate::parallel;
use crate::service::{load_bundles, AppState, ServiceConfig, DATA_DIR_ENV};

#[derive(Debug, Parser)]
#[command(name = "pragrank", version, about = "Pragmatic program synthesis and ranking distillation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate a domain's programs and write its lexicon.
    Enumerate(EnumerateArgs),
    /// Inspect a lexicon file, or sample a random valid one.
    Lexicon(LexiconArgs),
    /// Rank programs for a query with the exact listener.
    Rsa(RsaArgs),
    /// Generate greedy-speaker ranking records.
    Dataset(DatasetArgs),
    /// Distill a global ranking from a dataset by annealing.
    DistillAnneal(AnnealArgs),
    /// Distill a global ranking with the neural pairwise scorer.
    DistillNeural(NeuralArgs),
    /// Replay traces against listeners and report cumulative success.
    Replay(ReplayArgs),
    /// Time listeners turn by turn.
    Bench(BenchArgs),
    /// Check that chain-extracted rankings are exact on random lexicons.
    TheoryExists(ExistsArgs),
    /// Measure how early pairwise orders stabilize along the chain.
    TheoryStability(StabilityArgs),
    /// Run the interactive session service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    domain: String,
    /// Size of the string sample (regex domains).
    #[arg(long, default_value_t = 2000)]
    strings: usize,
    #[arg(long, default_value_t = 20)]
    l_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct LexiconArgs {
    /// Lexicon to validate and summarize.
    #[arg(long, conflicts_with = "random")]
    input: Option<PathBuf>,
    /// Sample an `MxN` lexicon instead.
    #[arg(long, value_name = "MxN")]
    random: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    p_true: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RsaArgs {
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Comma-separated utterance ids.
    #[arg(long, allow_hyphen_values = true)]
    query: String,
    #[arg(long, default_value_t = 10)]
    topk: usize,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long)]
    lexicon: PathBuf,
    /// Utterances per target.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Use every k-th program as a target.
    #[arg(long, default_value_t = 1)]
    every: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also report pairwise orientation conflicts.
    #[arg(long)]
    cycles: bool,
}

#[derive(Debug, Args)]
pub struct AnnealArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Resolve ids against this lexicon; without it the programs are those
    /// named in the dataset.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Iterations per validation window.
    #[arg(long = "V", default_value_t = 10_000)]
    validation_every: u64,
    /// Windows compared for convergence.
    #[arg(long = "t", default_value_t = 5)]
    patience: usize,
    /// Swap-count spread below which annealing stops.
    #[arg(long = "T", default_value_t = 10)]
    threshold: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_iterations: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NeuralArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    /// Grammar used to encode programs.
    #[arg(long)]
    domain: String,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 10)]
    ensemble: usize,
    #[arg(long, value_delimiter = ',', default_value = "128,128,128")]
    hidden: Vec<usize>,
    /// Fraction of targets held out for model selection.
    #[arg(long, default_value_t = 0.1)]
    validation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ListenerArgs {
    /// Any of l0, l1, anneal, neural.
    #[arg(long, value_delimiter = ',', default_value = "l0,l1,anneal")]
    listeners: Vec<String>,
    /// Ranking used by the `anneal` listener.
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Ranking used by the `neural` listener.
    #[arg(long)]
    neural_sigma: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    lexicon: PathBuf,
    /// Trace file (`tag TAB target TAB u1;u2;...`).
    #[arg(long, conflicts_with = "simulate")]
    traces: Option<PathBuf>,
    /// Simulate greedy-speaker traces of this length for every program.
    #[arg(long)]
    simulate: Option<usize>,
    #[command(flatten)]
    listeners: ListenerArgs,
    #[arg(long, default_value_t = 1)]
    topk: usize,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    write_traces: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Build this domain in memory...
    #[arg(long, conflicts_with = "lexicon")]
    domain: Option<String>,
    /// ...or load this lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[command(flatten)]
    listeners: ListenerArgs,
    /// Trace length.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Use every k-th program as a target.
    #[arg(long, default_value_t = 7)]
    every: usize,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExistsArgs {
    /// Number of lexicons.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    depth: usize,
    #[arg(long, default_value_t = 10)]
    min_size: usize,
    #[arg(long, default_value_t = 20)]
    max_size: usize,
    #[arg(long, default_value_t = 0.5)]
    p_true: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.5")]
    p_trues: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "10,20,50")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    per_cell: usize,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory holding `<domain>/lexicon.praglex` and `<domain>/sigma.rank`.
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    /// Build (and save, when a data dir is given) domains that have no bundle.
    #[arg(long, value_delimiter = ',')]
    build: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    event_log: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl From<pragrank_core::Error> for CliError {
    fn from(e: pragrank_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn main() -> ExitCode {
    run(std::env::args_os(), &mut std::io::stdout().lock())
}

pub fn run<I, T>(args: I, out: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli, out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Data(Error::Io {
        path: "<stdout>".into(),
        source: e,
    })
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Enumerate(a) => enumerate(a, out),
        Command::Lexicon(a) => lexicon(a, out),
        Command::Rsa(a) => rsa(a, out),
        Command::Dataset(a) => dataset(a, out),
        Command::DistillAnneal(a) => distill_anneal(a, out),
        Command::DistillNeural(a) => distill_neural_cmd(a, out),
        Command::Replay(a) => replay_cmd(a, out),
        Command::Bench(a) => bench_cmd(a, out),
        Command::TheoryExists(a) => theory_exists(a, out),
        Command::TheoryStability(a) => theory_stability(a, out),
        Command::Serve(a) => serve(a),
    }
}

fn domain_arg(s: &str) -> CliResult<Domain> {
    s.parse().map_err(|e: Error| usage(e.to_string()))
}

fn enumerate(a: EnumerateArgs, out: &mut dyn Write) -> CliResult {
    let domain = domain_arg(&a.domain)?;
    let cfg = EnumerateConfig {
        strings: a.strings,
        l_max: a.l_max,
        seed: a.seed,
    };
    let e = enumerate_domain(domain, &cfg)?;
    let programs = match &e.programs {
        Programs::Regex(p) => format_program_list(p),
        Programs::Animals(p) => p.iter().map(|x| format!("{x}\n")).collect(),
    };
    write_text(&a.out_dir.join("programs.txt"), &programs)?;
    write_text(&a.out_dir.join(crate::bundle::LEXICON_FILE), &format_lexicon(&e.lexicon)?)?;
    if !e.patterns.is_empty() {
        write_text(&a.out_dir.join("patterns.txt"), &format_patterns(&e.patterns))?;
    }
    writeln!(out, "domain\t{domain}").map_err(io_err)?;
    writeln!(out, "syntactic_programs\t{}", e.syntactic_count).map_err(io_err)?;
    writeln!(out, "semantic_programs\t{}", e.lexicon.n()).map_err(io_err)?;
    writeln!(out, "utterances\t{}", e.lexicon.m()).map_err(io_err)?;
    Ok(())
}

fn lexicon(a: LexiconArgs, out: &mut dyn Write) -> CliResult {
    let lex = match (&a.input, &a.random) {
        (Some(path), None) => load_lexicon(path)?,
        (None, Some(shape)) => {
            let (m, n) = shape
                .split_once('x')
                .and_then(|(m, n)| Some((m.parse().ok()?, n.parse().ok()?)))
                .ok_or_else(|| usage(format!("--random expects MxN, got `{shape}`")))?;
            sample_random_lexicon(m, n, a.p_true, a.seed)?
        }
        _ => return Err(usage("give --input FILE or --random MxN")),
    };
    if let Some(path) = &a.out {
        write_text(path, &format_lexicon(&lex)?)?;
    }
    writeln!(out, "utterances\t{}", lex.m()).map_err(io_err)?;
    writeln!(out, "programs\t{}", lex.n()).map_err(io_err)?;
    writeln!(out, "ones\t{}", lex.ones()).map_err(io_err)?;
    writeln!(out, "unique_rows_and_columns\t{}", lex.has_unique_rows_and_columns()).map_err(io_err)?;
    Ok(())
}

fn rsa(a: RsaArgs, out: &mut dyn Write) -> CliResult {
    let lex = load_lexicon(&a.lexicon)?;
    let prior = Prior::uniform(lex.n());
    let us = a
        .query
        .split(',')
        .map(|id| {
            lex.utterance_index(id)
                .ok_or_else(|| CliError::Data(Error::Format(format!("unknown utterance `{id}`"))))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let ranked: Vec<Scored> = if us.len() == 1 {
        let (l, _) = rsa_chain(&lex, &prior, a.depth)?;
        let items = lex
            .row(us[0])
            .iter()
            .map(|w| Scored {
                hypothesis: w,
                score: l.get(us[0], w),
            })
            .collect();
        rank_descending(items).into_iter().take(a.topk).collect()
    } else {
        match a.depth {
            0 => {
                let consistent = lex.consistent_set(&us);
                let z: f64 = consistent.iter().map(|w| prior.weight(w)).sum();
                let items = consistent
                    .iter()
                    .map(|w| Scored {
                        hypothesis: w,
                        score: prior.weight(w) / z,
                    })
                    .collect();
                rank_descending(items).into_iter().take(a.topk).collect()
            }
            1 => incremental_pragmatic_listener(&lex, &prior, &us, a.topk)?,
            d => return Err(usage(format!("multi-example queries support --depth 0 or 1, got {d}"))),
        }
    };
    if ranked.is_empty() {
        return Err(pragrank_core::Error::NoConsistentProgram.into());
    }
    for s in ranked {
        writeln!(out, "{}\t{}", lex.hypothesis_id(s.hypothesis), s.score).map_err(io_err)?;
    }
    Ok(())
}

fn every(n: usize, k: usize) -> CliResult<Vec<usize>> {
    if k == 0 {
        return Err(usage("--every must be at least 1"));
    }
    Ok((0..n).step_by(k).collect())
}

/// Above this many ranked pairs the cycle report samples instead of counting.
const EXACT_CYCLE_PAIRS: u64 = 20_000_000;
const SAMPLED_PAIRS_PER_RECORD: usize = 200;

fn dataset(a: DatasetArgs, out: &mut dyn Write) -> CliResult {
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let lex = load_lexicon(&a.lexicon)?;
    let targets = every(lex.n(), a.every)?;
    let d = parallel::generate_dataset(&lex, &Prior::uniform(lex.n()), &targets, a.n)?;
    write_text(&a.out, &format_dataset(&d, &lex)?)?;
    writeln!(out, "records\t{}", d.len()).map_err(io_err)?;
    if a.cycles {
        let pairs: u64 = d.records.iter().map(|r| (r.ranking.len() as u64).pow(2) / 2).sum();
        let c = if pairs <= EXACT_CYCLE_PAIRS {
            cycle_report(&d)
        } else {
            writeln!(out, "cycle_estimate\tsampled {SAMPLED_PAIRS_PER_RECORD} pairs per record").map_err(io_err)?;
            cycle_report_sampled(&d, SAMPLED_PAIRS_PER_RECORD, 0)
        };
        writeln!(out, "comparable_pairs\t{}", c.comparable_pairs).map_err(io_err)?;
        writeln!(out, "conflicted_pairs\t{}", c.conflicted_pairs).map_err(io_err)?;
        writeln!(out, "cycle_fraction\t{}", c.cycle_fraction).map_err(io_err)?;
    }
    Ok(())
}

/// A dataset and the program ids its indices refer to.
fn load_dataset(path: &Path, lexicon: Option<&Path>) -> CliResult<(RankingDataset, Vec<String>)> {
    let text = read_text(path)?;
    if let Some(lp) = lexicon {
        let lex = load_lexicon(lp)?;
        let d = parse_dataset(&text, &lex).map_err(|e| e.in_file(path))?;
        return Ok((d, lex.hypotheses().to_vec()));
    }
    let raw = parse_dataset_ids(&text).map_err(|e| e.in_file(path))?;
    let mut ids: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut intern = |id: &str| {
        *index.entry(id.to_string()).or_insert_with(|| {
            ids.push(id.to_string());
            ids.len() - 1
        })
    };
    let records = raw
        .iter()
        .map(|r| {
            let target = intern(&r.target);
            let ranking = r.ranking.iter().map(|w| intern(w)).collect();
            Record {
                target,
                utterances: (0..r.utterances.len()).collect(),
                ranking,
            }
        })
        .collect();
    Ok((RankingDataset { records }, ids))
}

fn distill_anneal(a: AnnealArgs, out: &mut dyn Write) -> CliResult {
    if a.validation_every == 0 || a.patience == 0 {
        return Err(usage("--V and --t must be positive"));
    }
    let (d, ids) = load_dataset(&a.dataset, a.lexicon.as_deref())?;
    let cfg = AnnealConfig {
        validation_every: a.validation_every,
        patience: a.patience,
        threshold: a.threshold,
        max_iterations: a.max_iterations,
        seed: a.seed,
    };
    let outcome = anneal_ranking(&d, ids.len(), &cfg)?;
    write_text(&a.out, &format_ranking(&outcome.ranking, &ids)?)?;
    writeln!(out, "converged\t{}", outcome.converged).map_err(io_err)?;
    writeln!(out, "iterations\t{}", outcome.iterations).map_err(io_err)?;
    writeln!(out, "last_window_swaps\t{}", outcome.window_swaps.last().copied().unwrap_or(0)).map_err(io_err)?;
    if !outcome.converged {
        eprintln!("warning: annealing hit the iteration cap; wrote the quietest window's ranking");
    }
    Ok(())
}

fn distill_neural_cmd(a: NeuralArgs, out: &mut dyn Write) -> CliResult {
    let domain = domain_arg(&a.domain)?;
    if a.hidden.is_empty() || a.hidden.contains(&0) {
        return Err(usage("--hidden needs positive layer sizes"));
    }
    let lex = load_lexicon(&a.lexicon)?;
    let d = parse_dataset(&read_text(&a.dataset)?, &lex).map_err(|e| e.in_file(&a.dataset))?;
    let features = Programs::parse_ids(domain, lex.hypotheses())?.features(domain)?;
    let cfg = TrainConfig {
        hidden: a.hidden,
        epochs: a.epochs,
        batch_size: a.batch_size,
        learning_rate: a.lr,
        ensemble_size: a.ensemble,
        seed: a.seed,
    };
    let (ensemble, sigma) = distill_neural(&features, &d, &cfg, a.validation)?;
    if let Some(path) = &a.model_out {
        write_bytes(path, &encode_model(&ensemble))?;
    }
    write_text(&a.out, &format_ranking(&sigma, lex.hypotheses())?)?;
    writeln!(out, "nets\t{}", ensemble.nets.len()).map_err(io_err)?;
    Ok(())
}

fn load_sigma(path: &Path, lex: &Lexicon) -> CliResult<GlobalRanking> {
    let entries = parse_ranking(&read_text(path)?).map_err(|e| e.in_file(path))?;
    Ok(ranking_for_lexicon(&entries, lex).map_err(|e| e.in_file(path))?)
}

/// Instantiates the requested listeners over `lex`.
fn listeners<'a>(
    args: &ListenerArgs,
    lex: &'a Lexicon,
    prior: &'a Prior,
    anneal: impl FnOnce() -> CliResult<GlobalRanking>,
) -> CliResult<Vec<Box<dyn Listener + Sync + 'a>>> {
    let mut anneal = Some(anneal);
    let mut out: Vec<Box<dyn Listener + Sync + 'a>> = Vec::new();
    for name in &args.listeners {
        out.push(match name.as_str() {
            "l0" => Box::new(RankListener::literal(lex, prior)?),
            "l1" => Box::new(ExactL1::new(lex, prior)?),
            "anneal" => {
                let sigma = match &args.sigma {
                    Some(p) => load_sigma(p, lex)?,
                    None => (anneal.take().ok_or_else(|| usage("`anneal` listed twice"))?)()?,
                };
                Box::new(RankListener::new("anneal", lex, sigma)?)
            }
            "neural" => {
                let path = args
                    .neural_sigma
                    .as_ref()
                    .ok_or_else(|| usage("the neural listener needs --neural-sigma"))?;
                Box::new(RankListener::new("neural", lex, load_sigma(path, lex)?)?)
            }
            other => return Err(usage(format!("unknown listener `{other}` (l0, l1, anneal, neural)"))),
        });
    }
    Ok(out)
}

fn replay_cmd(a: ReplayArgs, out: &mut dyn Write) -> CliResult {
    let lex = load_lexicon(&a.lexicon)?;
    let prior = Prior::uniform(lex.n());
    let traces: Vec<ReplayTrace> = match (&a.traces, a.simulate) {
        (Some(path), None) => {
            let ingested = parse_traces(&read_text(path)?, &lex).map_err(|e| e.in_file(path))?;
            for r in &ingested.rejected {
                eprintln!("warning: {}: line {}: rejected: {}", path.display(), r.line, r.reason);
            }
            ingested.traces
        }
        (None, Some(n)) if n > 0 => parallel_simulate(&lex, &prior, n)?,
        _ => return Err(usage("give --traces FILE or --simulate N (N >= 1)")),
    };
    if let Some(path) = &a.write_traces {
        write_text(path, &format_traces(&traces, &lex)?)?;
    }
    let ls = listeners(&a.listeners, &lex, &prior, || {
        Err(usage("the anneal listener needs --sigma"))
    })?;
    let turns = traces.iter().map(|t| t.utterances.len()).max().unwrap_or(0);
    let curves: Vec<_> = ls
        .iter()
        .map(|l| {
            let results = parallel::replay_traces(&traces, l.as_ref(), a.topk);
            (l.name().to_string(), success_curve(&results, turns, a.resamples, a.seed))
        })
        .collect();
    let csv = curve_csv(&curves);
    match &a.out {
        Some(path) => write_text(path, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(io_err)?,
    }
    Ok(())
}

fn parallel_simulate(lex: &Lexicon, prior: &Prior, n: usize) -> CliResult<Vec<ReplayTrace>> {
    use rayon::prelude::*;
    let targets: Vec<usize> = (0..lex.n()).collect();
    let chunks = targets
        .par_chunks(64)
        .map(|c| simulate_traces(lex, prior, c, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn bench_cmd(a: BenchArgs, out: &mut dyn Write) -> CliResult {
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let lex = match (&a.domain, &a.lexicon) {
        (Some(d), None) => enumerate_domain(domain_arg(d)?, &EnumerateConfig::default())?.lexicon,
        (None, Some(p)) => load_lexicon(p)?,
        _ => return Err(usage("give --domain NAME or --lexicon FILE")),
    };
    let prior = Prior::uniform(lex.n());
    let targets = every(lex.n(), a.every)?;
    let traces = simulate_traces(&lex, &prior, &targets, a.n)?;
    let ls = listeners(&a.listeners, &lex, &prior, || {
        let d = parallel::generate_dataset(&lex, &prior, &targets, 3)?;
        Ok(anneal_ranking(&d, lex.n(), &AnnealConfig::default())?.ranking)
    })?;
    let refs: Vec<&dyn Listener> = ls.iter().map(|l| l.as_ref() as &dyn Listener).collect();
    let rows = bench(&refs, &traces, a.repetitions);
    let csv = timing_csv(&rows);
    match &a.out {
        Some(path) => write_text(path, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(io_err)?,
    }
    Ok(())
}

fn theory_exists(a: ExistsArgs, out: &mut dyn Write) -> CliResult {
    if a.depth == 0 || a.min_size == 0 || a.min_size > a.max_size {
        return Err(usage("need --depth >= 1 and 1 <= --min-size <= --max-size"));
    }
    let cfg = ExistsConfig {
        lexicons: a.n,
        min_size: a.min_size,
        max_size: a.max_size,
        p_true: a.p_true,
        depth: a.depth,
        seed: a.seed,
    };
    let report = parallel::exp_ranking_exists(&cfg)?;
    writeln!(out, "lexicons\t{}", report.lexicons).map_err(io_err)?;
    writeln!(out, "checks\t{}", report.checks).map_err(io_err)?;
    writeln!(out, "violations\t{}", report.violations).map_err(io_err)?;
    if let Some(v) = &report.first_violation {
        writeln!(out, "first_violation\t{v:?}").map_err(io_err)?;
    }
    Ok(())
}

fn theory_stability(a: StabilityArgs, out: &mut dyn Write) -> CliResult {
    if a.iters < 2 {
        return Err(usage("--iters must be at least 2"));
    }
    let cfg = StabilityConfig {
        p_trues: a.p_trues,
        sizes: a.sizes,
        per_cell: a.per_cell,
        iters: a.iters,
        resamples: a.resamples,
        seed: a.seed,
    };
    let cells = parallel::exp_stability(&cfg)?;
    let mut csv = String::from("p_true,size,n,mean,ci_lo,ci_hi\n");
    for c in &cells {
        csv.push_str(&format!("{},{},{},{},{},{}\n", c.p_true, c.size, c.samples.len(), c.mean, c.ci_lo, c.ci_hi));
    }
    match &a.out {
        Some(path) => write_text(path, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(io_err)?,
    }
    Ok(())
}

fn serve(a: ServeArgs) -> CliResult {
    let mut bundles = match &a.data_dir {
        Some(dir) => load_bundles(dir)?,
        None => Vec::new(),
    };
    for name in &a.build {
        let domain = domain_arg(name)?;
        if bundles.iter().any(|b| b.domain == domain) {
            continue;
        }
        eprintln!("building {domain}...");
        let b = Bundle::build(domain, &EnumerateConfig::default(), 3, &AnnealConfig::default())?;
        if let Some(dir) = &a.data_dir {
            b.save(&dir.join(domain.name()))?;
        }
        bundles.push(b);
    }
    if bundles.is_empty() {
        return Err(usage(format!(
            "no domain bundles: set --data-dir or {DATA_DIR_ENV}, or pass --build regex-small"
        )));
    }
    let state = AppState::new(
        bundles,
        &ServiceConfig {
            seed: a.seed,
            event_log: a.event_log,
        },
    )?;
    let runtime = tokio::runtime::Runtime::new().map_err(io_err)?;
    runtime
        .block_on(crate::service::serve(a.addr, Arc::new(state)))
        .map_err(io_err)
}
