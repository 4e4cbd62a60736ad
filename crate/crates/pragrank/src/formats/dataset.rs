use pragrank_core::ranking::{Record, RankingDataset};
use pragrank_core::Lexicon;

use super::{check_id, split_lines};
use crate::error::{Error, Result};

/// A dataset line before ids are resolved against a lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdRecord {
    pub target: String,
    pub utterances: Vec<String>,
    pub ranking: Vec<String>,
}

/// `target TAB u,u,... TAB w,w,...` with the ranking best first.
pub fn format_dataset(dataset: &RankingDataset, lex: &Lexicon) -> Result<String> {
    let mut out = String::new();
    for record in &dataset.records {
        if record.utterances.is_empty() || record.ranking.is_empty() {
            return Err(Error::Format("dataset records need utterances and a ranking".into()));
        }
        let target = id(lex.hypotheses(), record.target)?;
        out.push_str(target);
        out.push('\t');
        push_list(&mut out, lex.utterances(), &record.utterances)?;
        out.push('\t');
        push_list(&mut out, lex.hypotheses(), &record.ranking)?;
        out.push('\n');
    }
    Ok(out)
}

fn id(ids: &[String], i: usize) -> Result<&str> {
    let s = ids
        .get(i)
        .ok_or_else(|| Error::Format(format!("index {i} outside the lexicon")))?;
    check_id(s, &['\t', ','])?;
    Ok(s)
}

fn push_list(out: &mut String, ids: &[String], items: &[usize]) -> Result<()> {
    for (k, &i) in items.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(id(ids, i)?);
    }
    Ok(())
}

pub fn parse_dataset_ids(text: &str) -> Result<Vec<IdRecord>> {
    split_lines(text)
        .into_iter()
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split('\t').collect();
            let [target, utterances, ranking] = fields[..] else {
                return Err(Error::parse(i + 1, format!("expected 3 tab-separated fields, found {}", fields.len())));
            };
            // an empty field is one empty-string id: records are never empty
            Ok(IdRecord {
                target: target.to_string(),
                utterances: utterances.split(',').map(String::from).collect(),
                ranking: ranking.split(',').map(String::from).collect(),
            })
        })
        .collect()
}

/// Resolves every id against `lex`; unknown ids are errors at their line.
pub fn parse_dataset(text: &str, lex: &Lexicon) -> Result<RankingDataset> {
    let records = parse_dataset_ids(text)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 1;
            let hyp = |s: &str| {
                lex.hypothesis_index(s)
                    .ok_or_else(|| Error::parse(line, format!("unknown program `{s}`")))
            };
            let utt = |s: &str| {
                lex.utterance_index(s)
                    .ok_or_else(|| Error::parse(line, format!("unknown example `{s}`")))
            };
            Ok(Record {
                target: hyp(&r.target)?,
                utterances: r.utterances.iter().map(|s| utt(s)).collect::<Result<_>>()?,
                ranking: r.ranking.iter().map(|s| hyp(s)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankingDataset { records })
}
