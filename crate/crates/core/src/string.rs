//! Symbol strings over a declared alphabet and their text format.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub type Symbol = u32;

/// A finite string whose symbols all lie below `alphabet_size`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyncString {
    symbols: Vec<Symbol>,
    alphabet_size: u32,
}

impl SyncString {
    pub fn new(symbols: Vec<Symbol>, alphabet_size: u32) -> Result<Self, Error> {
        if alphabet_size == 0 {
            return Err(Error::Parameter("alphabet size must be positive".into()));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::SymbolOutOfRange { symbol: bad, alphabet: alphabet_size });
        }
        Ok(Self { symbols, alphabet_size })
    }

    /// Alphabet size is one more than the largest symbol (1 for the empty string).
    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        let alphabet_size = symbols.iter().max().map_or(1, |m| m + 1);
        Self { symbols, alphabet_size }
    }

    /// Test helper: 'a' = 0, 'b' = 1, ...; decimal digits map to their value.
    pub fn from_letters(text: &str) -> Self {
        let symbols = text
            .chars()
            .map(|c| {
                if c.is_ascii_lowercase() {
                    c as u32 - 'a' as u32
                } else {
                    c.to_digit(10).expect("letter or digit")
                }
            })
            .collect();
        Self::from_symbols(symbols)
    }

    pub fn empty(alphabet_size: u32) -> Self {
        Self { symbols: Vec::new(), alphabet_size: alphabet_size.max(1) }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// 1-based half-open slice [i, j).
    pub fn slice(&self, i: usize, j: usize) -> SyncString {
        Self { symbols: self.symbols[i - 1..j - 1].to_vec(), alphabet_size: self.alphabet_size }
    }

    /// Rotation starting at 1-based position `start`.
    pub fn rotation(&self, start: usize) -> SyncString {
        let mut symbols = self.symbols[start - 1..].to_vec();
        symbols.extend_from_slice(&self.symbols[..start - 1]);
        Self { symbols, alphabet_size: self.alphabet_size }
    }

    pub fn with_alphabet(mut self, alphabet_size: u32) -> Result<Self, Error> {
        if let Some(&bad) = self.symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::SymbolOutOfRange { symbol: bad, alphabet: alphabet_size });
        }
        self.alphabet_size = alphabet_size;
        Ok(self)
    }

    pub fn to_text(&self, format: TextFormat) -> String {
        let mut out = format!("alphabet={}\n", self.alphabet_size);
        // A lone multi-digit symbol would read back as compact digits.
        let lone_wide = self.symbols.len() == 1 && self.symbols[0] >= 10;
        match format {
            TextFormat::Compact | TextFormat::Lines
                if self.alphabet_size <= 36 && (format == TextFormat::Compact || lone_wide) =>
            {
                out.extend(self.symbols.iter().map(|&s| std::char::from_digit(s, 36).unwrap()));
                out.push('\n');
            }
            _ => {
                for s in &self.symbols {
                    out.push_str(&s.to_string());
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Parses either the one-symbol-per-line or the compact base-36 form.
    pub fn parse_text(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Format("missing header".into()))?;
        let q: u32 = header
            .strip_prefix("alphabet=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Format(format!("bad header {header:?}")))?;
        let body: Vec<&str> = lines.collect();
        let compact = q <= 36
            && body.len() == 1
            && (body[0].len() > 1 || !body[0].chars().all(|c| c.is_ascii_digit()));
        let symbols = if compact {
            body[0]
                .chars()
                .map(|c| c.to_digit(36).ok_or_else(|| Error::Format(format!("bad digit {c:?}"))))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            body.iter()
                .map(|l| l.parse::<u32>().map_err(|_| Error::Format(format!("bad symbol {l:?}"))))
                .collect::<Result<Vec<_>, _>>()?
        };
        Self::new(symbols, q)
    }
}

impl fmt::Display for SyncString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet_size <= 36 {
            for &s in &self.symbols {
                write!(f, "{}", std::char::from_digit(s, 36).unwrap())?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TextFormat {
    #[default]
    Lines,
    Compact,
}

/// Monotone list of 1-based index pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Strictly increasing in both coordinates and every pair joins equal symbols.
    pub fn is_valid_for(&self, left: &[Symbol], right: &[Symbol]) -> bool {
        let increasing = self.pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        increasing
            && self.pairs.iter().all(|&(a, b)| {
                a >= 1 && b >= 1 && a <= left.len() && b <= right.len() && left[a - 1] == right[b - 1]
            })
    }
}
