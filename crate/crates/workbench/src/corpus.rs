use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// The distinct characters of a text, in ascending code-point order.
/// Symbol `i` of a sequence stands for `chars()[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    chars: Vec<char>,
    index: HashMap<char, usize>,
}

impl Alphabet {
    pub fn from_text(text: &str) -> Self {
        let mut chars: Vec<char> = text.chars().collect();
        chars.sort_unstable();
        chars.dedup();
        Self::from_sorted(chars)
    }

    /// Rejects lists that are not strictly ascending.
    pub fn from_chars(chars: Vec<char>) -> Result<Self> {
        if chars.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format(
                "alphabet is not sorted and duplicate-free".into(),
            ));
        }
        Ok(Self::from_sorted(chars))
    }

    fn from_sorted(chars: Vec<char>) -> Self {
        let index = chars.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Self { chars, index }
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn encode(&self, text: &str) -> Result<Vec<usize>> {
        text.chars()
            .map(|c| {
                self.index.get(&c).copied().ok_or_else(|| {
                    Error::Input(format!("character {c:?} is not in the model alphabet"))
                })
            })
            .collect()
    }

    pub fn decode(&self, symbols: &[usize]) -> Result<String> {
        symbols
            .iter()
            .map(|&s| {
                self.chars
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::Input(format!("symbol {s} is outside the alphabet")))
            })
            .collect()
    }
}

/// Read a UTF-8 text file. The alphabet covers the whole file; the returned
/// sequence is truncated to the first `limit` characters if given.
pub fn load_corpus(path: &Path, limit: Option<usize>) -> Result<(Alphabet, Vec<usize>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Encoding { path: path.into() })?;
    if text.is_empty() {
        return Err(Error::Input(format!("{}: corpus is empty", path.display())));
    }
    let alphabet = Alphabet::from_text(&text);
    let mut sequence = alphabet.encode(&text)?;
    if let Some(limit) = limit {
        sequence.truncate(limit);
    }
    Ok((alphabet, sequence))
}
