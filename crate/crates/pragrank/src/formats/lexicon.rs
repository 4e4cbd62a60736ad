use pragrank_core::{BitSet, Lexicon};

use super::{check_id, split_lines};
use crate::error::{Error, Result};

const MAGIC: &str = "PRAGLEX v1";

/// `PRAGLEX v1 m n`, the m×n matrix as `0`/`1` lines, then the utterance ids
/// and hypothesis ids one per line.
pub fn format_lexicon(lex: &Lexicon) -> Result<String> {
    let (m, n) = (lex.m(), lex.n());
    let mut out = String::with_capacity(m * (n + 1) + 64);
    out.push_str(&format!("{MAGIC} {m} {n}\n"));
    for row in lex.rows() {
        let mut line = vec![b'0'; n];
        for w in row.iter() {
            line[w] = b'1';
        }
        out.push_str(std::str::from_utf8(&line).expect("ascii"));
        out.push('\n');
    }
    for id in lex.utterances().iter().chain(lex.hypotheses()) {
        check_id(id, &[])?;
        out.push_str(id);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_lexicon(text: &str) -> Result<Lexicon> {
    let lines = split_lines(text);
    let header = lines.first().ok_or_else(|| Error::parse(1, "empty lexicon file"))?;
    let dims = header
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::parse(1, format!("expected `{MAGIC} m n`")))?;
    let (m, n) = match dims.split(' ').map(str::parse::<usize>).collect::<Vec<_>>()[..] {
        [Ok(m), Ok(n)] => (m, n),
        _ => return Err(Error::parse(1, format!("expected `{MAGIC} m n`"))),
    };
    let expected = 1 + 2 * m + n;
    if lines.len() != expected {
        return Err(Error::parse(
            lines.len().min(expected) + 1,
            format!("expected {expected} lines for a {m}x{n} lexicon, found {}", lines.len()),
        ));
    }
    let mut rows = Vec::with_capacity(m);
    for (i, line) in lines[1..=m].iter().enumerate() {
        if line.len() != n {
            return Err(Error::parse(i + 2, format!("row has {} entries, expected {n}", line.len())));
        }
        let mut row = BitSet::new(n);
        for (w, b) in line.bytes().enumerate() {
            match b {
                b'1' => row.insert(w),
                b'0' => {}
                _ => return Err(Error::parse(i + 2, format!("unexpected character {:?}", b as char))),
            }
        }
        rows.push(row);
    }
    let utterances = lines[1 + m..1 + 2 * m].iter().map(|s| s.to_string()).collect();
    let hypotheses = lines[1 + 2 * m..].iter().map(|s| s.to_string()).collect();
    Ok(Lexicon::from_rows(utterances, hypotheses, rows)?)
}
