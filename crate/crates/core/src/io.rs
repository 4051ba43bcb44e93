//! FASTA and substitution-matrix text formats.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastaRecord {
    pub id: String,
    pub description: String,
    pub sequence: String,
}

/// Parses FASTA text. Sequence lines are concatenated with whitespace
/// removed; blank lines and `;` comments are skipped. Line numbers in errors
/// are 1-based.
pub fn parse_fasta(text: &str) -> Result<Vec<FastaRecord>> {
    let mut records: Vec<FastaRecord> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let header = header.trim();
            let (id, description) = match header.split_once(char::is_whitespace) {
                Some((id, rest)) => (id, rest.trim()),
                None => (header, ""),
            };
            if id.is_empty() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "empty FASTA header".into(),
                });
            }
            records.push(FastaRecord {
                id: id.to_string(),
                description: description.to_string(),
                sequence: String::new(),
            });
            continue;
        }
        let Some(rec) = records.last_mut() else {
            return Err(Error::Parse {
                line: idx + 1,
                message: "sequence data before the first `>` header".into(),
            });
        };
        for ch in line.chars().filter(|c| !c.is_whitespace()) {
            if !ch.is_ascii_alphabetic() && ch != '*' && ch != '-' {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("unexpected character `{ch}` in sequence"),
                });
            }
            rec.sequence.push(ch.to_ascii_uppercase());
        }
    }
    if records.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "no FASTA records found".into(),
        });
    }
    Ok(records)
}

/// A square substitution matrix as read from NCBI text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionMatrix {
    pub symbols: Vec<char>,
    pub scores: Vec<Vec<i32>>,
}

impl SubstitutionMatrix {
    pub fn score(&self, a: char, b: char) -> Option<i32> {
        let i = self.symbols.iter().position(|&s| s == a)?;
        let j = self.symbols.iter().position(|&s| s == b)?;
        Some(self.scores[i][j])
    }

    /// The same matrix restricted to `symbols`, in that order.
    pub fn select(&self, symbols: &[char]) -> Option<SubstitutionMatrix> {
        let idx: Vec<usize> = symbols
            .iter()
            .map(|c| self.symbols.iter().position(|s| s == c))
            .collect::<Option<_>>()?;
        Some(SubstitutionMatrix {
            symbols: symbols.to_vec(),
            scores: idx
                .iter()
                .map(|&i| idx.iter().map(|&j| self.scores[i][j]).collect())
                .collect(),
        })
    }
}

/// Parses the whitespace-delimited NCBI layout: `#` comments, a header line
/// of column symbols, then one line per row starting with its symbol.
pub fn parse_matrix(text: &str) -> Result<SubstitutionMatrix> {
    let mut header: Option<Vec<char>> = None;
    let mut rows: Vec<(char, Vec<i32>)> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let Some(cols) = &header else {
            let symbols = tokens
                .iter()
                .map(|t| single_char(t, line_no))
                .collect::<Result<Vec<char>>>()?;
            header = Some(symbols);
            continue;
        };
        let symbol = single_char(tokens[0], line_no)?;
        if tokens.len() - 1 != cols.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} scores, found {}", cols.len(), tokens.len() - 1),
            });
        }
        let values = tokens[1..]
            .iter()
            .map(|t| {
                t.parse::<i32>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("`{t}` is not an integer"),
                })
            })
            .collect::<Result<Vec<i32>>>()?;
        rows.push((symbol, values));
    }
    let Some(symbols) = header else {
        return Err(Error::Parse {
            line: last_line.max(1),
            message: "matrix has no header line".into(),
        });
    };
    if rows.len() != symbols.len() {
        return Err(Error::Parse {
            line: last_line.max(1),
            message: format!("expected {} rows, found {}", symbols.len(), rows.len()),
        });
    }
    let mut scores = Vec::with_capacity(rows.len());
    for (i, (symbol, values)) in rows.into_iter().enumerate() {
        if symbol != symbols[i] {
            return Err(Error::Parse {
                line: last_line,
                message: format!("row `{symbol}` does not follow the header order"),
            });
        }
        scores.push(values);
    }
    Ok(SubstitutionMatrix { symbols, scores })
}

fn single_char(token: &str, line: usize) -> Result<char> {
    let mut chars = token.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c.to_ascii_uppercase()),
        _ => Err(Error::Parse {
            line,
            message: format!("`{token}` is not a single symbol"),
        }),
    }
}

pub const BLOSUM62_TEXT: &str = include_str!("../data/blosum62.txt");
