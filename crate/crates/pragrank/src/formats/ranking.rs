use pragrank_core::{GlobalRanking, Lexicon};

use super::{check_id, split_lines};
use crate::error::{Error, Result};

const MAGIC: &str = "PRAGRANK v1";

/// `PRAGRANK v1 n` then `id TAB score`, best first. Scores use the shortest
/// representation that parses back to the same double.
pub fn format_ranking(ranking: &GlobalRanking, ids: &[String]) -> Result<String> {
    if ids.len() != ranking.len() {
        return Err(Error::Format(format!("{} ids for a ranking of {} programs", ids.len(), ranking.len())));
    }
    let mut out = format!("{MAGIC} {}\n", ranking.len());
    for &w in ranking.order() {
        check_id(&ids[w], &['\t'])?;
        out.push_str(&format!("{}\t{}\n", ids[w], ranking.score(w)));
    }
    Ok(out)
}

pub fn parse_ranking(text: &str) -> Result<Vec<(String, f64)>> {
    let lines = split_lines(text);
    let n = lines
        .first()
        .and_then(|h| h.strip_prefix(MAGIC))
        .and_then(|rest| rest.strip_prefix(' '))
        .and_then(|n| n.parse::<usize>().ok())
        .ok_or_else(|| Error::parse(1, format!("expected `{MAGIC} n`")))?;
    if lines.len() != n + 1 {
        return Err(Error::parse(
            lines.len().min(n + 1) + 1,
            format!("expected {n} ranked programs, found {}", lines.len() - 1),
        ));
    }
    lines[1..]
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let (id, score) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(i + 2, "expected `id TAB score`"))?;
            let score: f64 = score
                .parse()
                .ok()
                .filter(|s: &f64| s.is_finite())
                .ok_or_else(|| Error::parse(i + 2, format!("bad score `{score}`")))?;
            Ok((id.to_string(), score))
        })
        .collect()
}

/// Scores indexed by the lexicon's hypotheses; every hypothesis must appear
/// exactly once.
pub fn ranking_for_lexicon(entries: &[(String, f64)], lex: &Lexicon) -> Result<GlobalRanking> {
    if entries.len() != lex.n() {
        return Err(Error::Format(format!(
            "ranking covers {} programs, lexicon has {}",
            entries.len(),
            lex.n()
        )));
    }
    let mut scores = vec![None; lex.n()];
    for (i, (id, score)) in entries.iter().enumerate() {
        let w = lex
            .hypothesis_index(id)
            .ok_or_else(|| Error::parse(i + 2, format!("unknown program `{id}`")))?;
        if scores[w].replace(*score).is_some() {
            return Err(Error::parse(i + 2, format!("program `{id}` ranked twice")));
        }
    }
    Ok(GlobalRanking::from_scores(scores.into_iter().map(|s| s.expect("all filled")).collect())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn scores_round_trip_bit_exactly(scores in proptest::collection::vec(-1e300f64..1e300, 1..40)) {
            let ids: Vec<String> = (0..scores.len()).map(|i| format!("p{i}")).collect();
            let lex = Lexicon::build(vec!["u".into()], ids.clone(), |_, _| true).unwrap();
            let sigma = GlobalRanking::from_scores(scores.clone()).unwrap();
            let text = format_ranking(&sigma, &ids).unwrap();
            let back = ranking_for_lexicon(&parse_ranking(&text).unwrap(), &lex).unwrap();
            for (a, b) in back.scores().iter().zip(&scores) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back.order(), sigma.order());
        }
    }

    #[test]
    fn rejects_duplicates_and_gaps() {
        let lex = Lexicon::build(vec!["u".into()], vec!["a".into(), "b".into()], |_, _| true).unwrap();
        let dup = parse_ranking("PRAGRANK v1 2\na\t1\na\t0.5\n").unwrap();
        assert!(matches!(ranking_for_lexicon(&dup, &lex), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_ranking("PRAGRANK v1 2\na\t1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_ranking("PRAGRANK v1 1\na\tNaN\n"), Err(Error::Parse { line: 2, .. })));
        assert!(ranking_for_lexicon(&parse_ranking("PRAGRANK v1 1\na\t1\n").unwrap(), &lex).is_err());
    }
}
