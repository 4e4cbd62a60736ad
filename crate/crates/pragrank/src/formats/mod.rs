//! On-disk formats. Every text format is line-oriented and round-trips
//! exactly; parsers report the 1-based line of the first problem.

mod dataset;
mod lexicon;
mod model;
mod programs;
mod ranking;
mod traces;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub use dataset::{format_dataset, parse_dataset, parse_dataset_ids, IdRecord};
pub use lexicon::{format_lexicon, parse_lexicon};
pub use model::{decode_model, encode_model, MODEL_MAGIC, MODEL_VERSION};
pub use programs::{format_patterns, format_program_list, parse_patterns, parse_program_list};
pub use ranking::{format_ranking, parse_ranking, ranking_for_lexicon};
pub use traces::{format_traces, parse_traces, Ingested, Rejected};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.into(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

/// Splits on `\n` only (ids may legitimately be empty, so no trimming) after
/// removing the single terminating newline.
fn split_lines(text: &str) -> Vec<&str> {
    match text.strip_suffix('\n') {
        Some("") => vec![""],
        Some(body) => body.split('\n').collect(),
        None if text.is_empty() => Vec::new(),
        None => text.split('\n').collect(),
    }
}

/// Ids end up inside line- and field-separated files.
fn check_id(id: &str, forbidden: &[char]) -> Result<()> {
    match id.chars().find(|c| *c == '\n' || *c == '\r' || forbidden.contains(c)) {
        Some(c) => Err(Error::Format(format!("id {id:?} contains the separator {c:?}"))),
        None => Ok(()),
    }
}

pub(crate) fn load_lexicon(path: &Path) -> Result<pragrank_core::Lexicon> {
    parse_lexicon(&read_text(path)?).map_err(|e| e.in_file(path))
}
