use std::path::Path;
use std::process::{Command, Output};

fn pragrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pragrank")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = pragrank(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn regex_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let summary = ok(&["enumerate", "--domain", "regex-small", "--out-dir", p(d)]);
    assert!(summary.contains("semantic_programs\t372"), "{summary}");
    let lex = d.join("lexicon.praglex");
    assert!(d.join("programs.txt").exists());

    let data = d.join("data.tsv");
    let summary = ok(&["dataset", "--lexicon", p(&lex), "--n", "3", "--out", p(&data), "--cycles"]);
    assert!(summary.contains("records\t"), "{summary}");
    assert!(summary.contains("cycle_fraction\t"), "{summary}");

    let sigma = d.join("sigma.rank");
    let summary = ok(&["distill-anneal", "--dataset", p(&data), "--lexicon", p(&lex), "--out", p(&sigma)]);
    assert!(summary.contains("converged\ttrue"), "{summary}");
    assert!(std::fs::read_to_string(&sigma).unwrap().starts_with("PRAGRANK v1 372\n"));

    let traces = d.join("traces.tsv");
    let curve = ok(&[
        "replay", "--lexicon", p(&lex), "--simulate", "3", "--listeners", "l0,anneal", "--sigma", p(&sigma),
        "--resamples", "50", "--write-traces", p(&traces),
    ]);
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("listener,turn,success_rate,ci_lo,ci_hi"));
    assert_eq!(lines.count(), 6);

    // replaying the written traces reproduces the simulated curve
    let again = ok(&[
        "replay", "--lexicon", p(&lex), "--traces", p(&traces), "--listeners", "l0,anneal", "--sigma", p(&sigma),
        "--resamples", "50",
    ]);
    assert_eq!(curve, again);

    let timing = ok(&[
        "bench", "--lexicon", p(&lex), "--listeners", "l0,anneal", "--sigma", p(&sigma), "--every", "31",
        "--repetitions", "1",
    ]);
    assert!(timing.starts_with("listener,turn,median_ms,ops\n"), "{timing}");
}

#[test]
fn random_lexicon_and_rsa_queries() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("r.praglex");
    let summary = ok(&["lexicon", "--random", "6x8", "--seed", "4", "--out", p(&lex)]);
    assert!(summary.contains("programs\t8"), "{summary}");
    let again = ok(&["lexicon", "--input", p(&lex)]);
    assert_eq!(summary, again);
    let text = std::fs::read_to_string(&lex).unwrap();
    let first_utterance = text.lines().nth(7).unwrap().to_string();
    let top = ok(&["rsa", "--lexicon", p(&lex), "--depth", "3", "--query", &first_utterance, "--topk", "2"]);
    assert!((1..=2).contains(&top.lines().count()), "{top}");
}

#[test]
fn theory_commands_report() {
    let out = ok(&["theory-exists", "--n", "20", "--depth", "10"]);
    assert!(out.contains("violations\t0"), "{out}");
    let csv = ok(&["theory-stability", "--p-trues", "0.5", "--sizes", "10", "--per-cell", "4", "--iters", "200", "--resamples", "20"]);
    assert!(csv.starts_with("p_true,size,n,mean,ci_lo,ci_hi\n"), "{csv}");
}

#[test]
fn exit_codes_separate_usage_and_data_errors() {
    assert_eq!(pragrank(&[]).status.code(), Some(1));
    assert_eq!(pragrank(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pragrank(&["enumerate", "--domain", "chess", "--out-dir", "/tmp/x"]).status.code(), Some(1));
    assert_eq!(pragrank(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.praglex");
    let o = pragrank(&["lexicon", "--input", p(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.praglex"));

    let bad = dir.path().join("bad.praglex");
    std::fs::write(&bad, "PRAGLEX v1 2 2\n01\n1x\na\nb\nx\ny\n").unwrap();
    let o = pragrank(&["lexicon", "--input", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));
}
