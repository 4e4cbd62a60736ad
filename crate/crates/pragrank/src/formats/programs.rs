use pragrank_core::domains::animals::Grid;
use pragrank_core::domains::regex::Regex;

use super::split_lines;
use crate::error::{Error, Result};

/// One canonical regex source per line.
pub fn format_program_list(programs: &[Regex]) -> String {
    programs.iter().map(|p| format!("{p}\n")).collect()
}

pub fn parse_program_list(text: &str) -> Result<Vec<Regex>> {
    split_lines(text)
        .into_iter()
        .enumerate()
        .map(|(i, line)| Regex::parse(line).map_err(|e| Error::parse(i + 1, e.to_string())))
        .collect()
}

/// Grids of 7 token lines, separated by one blank line.
pub fn format_patterns(grids: &[Grid]) -> String {
    grids.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("\n")
}

pub fn parse_patterns(text: &str) -> Result<Vec<Grid>> {
    let lines = split_lines(text);
    let mut grids = Vec::new();
    let mut start = 0;
    while start < lines.len() {
        let end = start + 7;
        if end > lines.len() {
            return Err(Error::parse(lines.len() + 1, "truncated grid"));
        }
        let block: String = lines[start..end].iter().map(|l| format!("{l}\n")).collect();
        grids.push(Grid::parse(&block).map_err(|e| Error::parse(start + 1, e.to_string()))?);
        if end < lines.len() {
            if !lines[end].is_empty() {
                return Err(Error::parse(end + 1, "expected a blank line between grids"));
            }
            start = end + 1;
            if start == lines.len() {
                return Err(Error::parse(start, "trailing blank line"));
            }
        } else {
            start = end;
        }
    }
    Ok(grids)
}
