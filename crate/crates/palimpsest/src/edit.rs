//! Edit metrics on stored strings. Storage strings are sequences over a
//! size-|V| alphabet, written as digit indices; codes map source blocks to
//! these strings and malleability is measured by how far an edit moves the
//! stored string under one of these metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A stored string: digit indices into the storage alphabet V.
pub type StorageString = Vec<u8>;

/// Distance between stored strings.
///
/// * `Hamming` — substitutions only; defined for equal lengths.
/// * `ExtendedHamming` — substitutions plus append/truncate at the end:
///   strings are compared position-wise and the length difference is added.
/// * `Levenshtein` — insertions, deletions, and substitutions anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditMetric {
    Hamming,
    ExtendedHamming,
    Levenshtein,
}

impl EditMetric {
    pub fn name(self) -> &'static str {
        match self {
            EditMetric::Hamming => "hamming",
            EditMetric::ExtendedHamming => "extended_hamming",
            EditMetric::Levenshtein => "levenshtein",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(EditMetric::Hamming),
            "extended_hamming" | "extended-hamming" => Ok(EditMetric::ExtendedHamming),
            "levenshtein" => Ok(EditMetric::Levenshtein),
            other => Err(Error::InvalidInput(format!(
                "unknown edit metric '{other}' (expected hamming, extended_hamming, or levenshtein)"
            ))),
        }
    }

    /// Distance between two stored strings. Errors only for `Hamming` on
    /// unequal lengths, where the metric is undefined.
    pub fn distance(self, a: &[u8], b: &[u8]) -> Result<u64> {
        match self {
            EditMetric::Hamming => {
                if a.len() != b.len() {
                    return Err(Error::InvalidInput(format!(
                        "hamming distance needs equal lengths, got {} and {}",
                        a.len(),
                        b.len()
                    )));
                }
                Ok(hamming(a, b))
            }
            EditMetric::ExtendedHamming => Ok(extended_hamming(a, b)),
            EditMetric::Levenshtein => Ok(levenshtein(a, b)),
        }
    }
}

/// Number of positions where the strings differ (equal lengths).
pub fn hamming(a: &[u8], b: &[u8]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).filter(|(x, y)| x != y).count() as u64
}

/// Position-wise mismatches over the common prefix length, plus the length
/// difference (suffix symbols count one edit each).
pub fn extended_hamming(a: &[u8], b: &[u8]) -> u64 {
    let common = a.len().min(b.len());
    let mismatches = a[..common]
        .iter()
        .zip(b[..common].iter())
        .filter(|(x, y)| x != y)
        .count() as u64;
    mismatches + (a.len().abs_diff(b.len())) as u64
}

/// Classic dynamic-programming Levenshtein distance with unit costs,
/// rolling a single row (O(min(|a|,|b|)) memory).
pub fn levenshtein(a: &[u8], b: &[u8]) -> u64 {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len() as u64;
    }
    let mut row: Vec<u64> = (0..=short.len() as u64).collect();
    for (i, &lc) in long.iter().enumerate() {
        let mut prev_diag = row[0];
        row[0] = i as u64 + 1;
        for (j, &sc) in short.iter().enumerate() {
            let sub = prev_diag + u64::from(lc != sc);
            prev_diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(prev_diag + 1);
        }
    }
    row[short.len()]
}

/// Largest storage alphabet renderable with one character per digit
/// (0-9 then a-z).
pub const MAX_RENDER_ALPHABET: usize = 36;

/// Render a storage string as one character per digit: 0-9 then a-z.
/// The empty string renders as "-".
pub fn format_word(word: &[u8], v_size: usize) -> Result<String> {
    if v_size > MAX_RENDER_ALPHABET {
        return Err(Error::InvalidInput(format!(
            "cannot render digits for alphabet size {v_size} > {MAX_RENDER_ALPHABET}"
        )));
    }
    if word.is_empty() {
        return Ok("-".into());
    }
    word.iter()
        .map(|&d| {
            if (d as usize) < v_size {
                Ok(char::from_digit(d as u32, MAX_RENDER_ALPHABET as u32).unwrap())
            } else {
                Err(Error::InvalidInput(format!(
                    "digit {d} out of range for alphabet size {v_size}"
                )))
            }
        })
        .collect()
}

/// Inverse of `format_word`: "-" is the empty string, otherwise each
/// character is a base-36 digit below `v_size`.
pub fn parse_word(s: &str, v_size: usize) -> Result<StorageString> {
    if v_size > MAX_RENDER_ALPHABET {
        return Err(Error::InvalidInput(format!(
            "cannot parse digits for alphabet size {v_size} > {MAX_RENDER_ALPHABET}"
        )));
    }
    if s == "-" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| match c.to_digit(MAX_RENDER_ALPHABET as u32) {
            Some(d) if (d as usize) < v_size => Ok(d as u8),
            _ => Err(Error::InvalidInput(format!(
                "character '{c}' is not a digit below {v_size}"
            ))),
        })
        .collect()
}
