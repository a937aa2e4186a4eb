//! Sequence files: one vector per line, whitespace-separated scalars, `#`
//! comments, blank lines ignored.

use uhatforge::error::{Error, Result, TextPos};
use uhatforge::Scalar;

pub fn parse_sequence<S: Scalar>(text: &str) -> Result<Vec<Vec<S>>> {
    let mut rows: Vec<Vec<S>> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let mut row = Vec::new();
        let mut offset = 0;
        for token in content.split_whitespace() {
            let col = content[offset..].find(token).map_or(offset, |p| p + offset);
            offset = col + token.len();
            let value = S::parse_scalar(token).map_err(|e| Error::Parse {
                pos: TextPos {
                    line: k + 1,
                    col: col + 1,
                },
                message: e.to_string(),
            })?;
            row.push(value);
        }
        if row.is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    pos: TextPos { line: k + 1, col: 1 },
                    message: format!("expected {} entries, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(rows)
}

/// Comma- or whitespace-separated scalars.
pub fn parse_vector<S: Scalar>(text: &str) -> Result<Vec<S>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(S::parse_scalar)
        .collect()
}
