use pragrank_core::eval::{ReplayTrace, TraceTag};
use pragrank_core::Lexicon;

use super::{check_id, split_lines};
use crate::error::{Error, Result};

/// A well-formed line whose content does not fit the lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejected {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ingested {
    pub traces: Vec<ReplayTrace>,
    pub rejected: Vec<Rejected>,
}

/// `tag TAB target TAB u1;u2;...`, one trace per line.
pub fn format_traces(traces: &[ReplayTrace], lex: &Lexicon) -> Result<String> {
    let mut out = String::new();
    for t in traces {
        t.validate(lex)?;
        let target = lex.hypothesis_id(t.target);
        check_id(target, &['\t'])?;
        out.push_str(&format!("{}\t{target}\t", t.tag));
        for (k, &u) in t.utterances.iter().enumerate() {
            if k > 0 {
                out.push(';');
            }
            let id = lex.utterance_id(u);
            check_id(id, &['\t', ';'])?;
            out.push_str(id);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Malformed lines abort with their line number; lines naming unknown ids or
/// examples the target does not satisfy are set aside in `rejected`.
pub fn parse_traces(text: &str, lex: &Lexicon) -> Result<Ingested> {
    let mut out = Ingested::default();
    for (i, line) in split_lines(text).into_iter().enumerate() {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        let [tag, target, utterances] = fields[..] else {
            return Err(Error::parse(line_no, format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        let tag: TraceTag = tag.parse().map_err(|e: pragrank_core::Error| Error::parse(line_no, e.to_string()))?;
        let mut reject = |reason: String| {
            out.rejected.push(Rejected { line: line_no, reason });
        };
        let Some(target) = lex.hypothesis_index(target) else {
            reject(format!("unknown program `{target}`"));
            continue;
        };
        let resolved: std::result::Result<Vec<usize>, String> = utterances
            .split(';')
            .map(|u| lex.utterance_index(u).ok_or_else(|| format!("unknown example `{u}`")))
            .collect();
        let trace = match resolved {
            Ok(utterances) => ReplayTrace { tag, target, utterances },
            Err(reason) => {
                reject(reason);
                continue;
            }
        };
        match trace.validate(lex) {
            Ok(()) => out.traces.push(trace),
            Err(e) => reject(e.to_string()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pragrank_core::eval::simulate_traces;
    use pragrank_core::lexicon::sample_random_lexicon;
    use pragrank_core::rsa::Prior;
    use proptest::prelude::*;

    fn toy() -> Lexicon {
        let rows = [[false, true, false, true], [false, true, true, true], [true, false, false, true], [true, true, true, true]];
        Lexicon::build(
            vec!["01".into(), "001".into(), "0".into(), "".into()],
            vec!["0{2}1+".into(), "0+1{1}".into(), "0*1".into(), "0+1*".into()],
            |u, w| rows[u][w],
        )
        .unwrap()
    }

    #[test]
    fn three_lines_three_traces() {
        let lex = toy();
        let text = "H0\t0+1{1}\t01\nH1\t0+1*\t0;01\nsimulated\t0{2}1+\t0\n";
        let got = parse_traces(text, &lex).unwrap();
        assert_eq!(got.traces.len(), 3);
        assert!(got.rejected.is_empty());
        assert_eq!(got.traces[1].utterances, vec![2, 0]);
        assert_eq!(format_traces(&got.traces, &lex).unwrap(), text);
    }

    #[test]
    fn inconsistent_record_is_rejected_alone() {
        let lex = toy();
        // "0" does not match 0+1{1}
        let text = "H0\t0+1{1}\t01;0\nH1\t0+1*\t0\nH1\tnope\t0\nH0\t0+1*\t0;zz\n";
        let got = parse_traces(text, &lex).unwrap();
        assert_eq!(got.traces.len(), 1);
        assert_eq!(got.rejected.iter().map(|r| r.line).collect::<Vec<_>>(), vec![1, 3, 4]);
    }

    #[test]
    fn malformed_lines_are_errors() {
        let lex = toy();
        assert!(matches!(parse_traces("H0\t0+1*\t0\nH0 0+1* 0\n", &lex), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_traces("H2\t0+1*\t0\n", &lex), Err(Error::Parse { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(seed in 0u64..500, n in 1usize..4) {
            let lex = sample_random_lexicon(9, 11, 0.5, seed).unwrap();
            let targets: Vec<usize> = (0..11).collect();
            let traces = simulate_traces(&lex, &Prior::uniform(11), &targets, n).unwrap();
            let text = format_traces(&traces, &lex).unwrap();
            let back = parse_traces(&text, &lex).unwrap();
            prop_assert!(back.rejected.is_empty());
            prop_assert_eq!(back.traces, traces);
        }
    }
}
