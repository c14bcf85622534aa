// SPDX-License-Identifier: Apache-2.0

//! DEF lexer. Whitespace-separated tokens, line-oriented so that peak memory
//! stays bounded by the token stream itself regardless of comment volume.

use std::io::BufRead;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Integer,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefToken {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
}

impl DefToken {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }

    pub fn as_i64(&self) -> Option<i64> {
        if self.kind == TokenKind::Integer {
            self.text.parse().ok()
        } else {
            None
        }
    }
}

const KEYWORDS: &[&str] = &[
    "VERSION", "DESIGN", "UNITS", "DISTANCE", "MICRONS", "DIEAREA", "ROW", "TRACKS", "GCELLGRID",
    "VIAS", "COMPONENTS", "PINS", "NETS", "SPECIALNETS", "END", "NEW", "ROUTED", "PLACED",
    "FIXED", "COVER", "UNPLACED", "NET", "DIRECTION", "USE", "PORT", "LAYER", "SHAPE", "PIN",
    "DO", "BY", "STEP", "SOURCE", "WEIGHT", "PROPERTY", "NONDEFAULTRULE", "REGIONS", "GROUPS",
    "BLOCKAGES", "FILLS", "SLOTS", "STYLES", "HISTORY", "PROPERTYDEFINITIONS", "BUSBITCHARS",
    "DIVIDERCHAR", "TECHNOLOGY",
];

fn is_punct(s: &str) -> bool {
    matches!(s, "(" | ")" | ";" | "-" | "+" | "*")
}

fn is_integer(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit()) && s.parse::<i64>().is_ok()
}

fn classify(word: &str) -> TokenKind {
    if is_punct(word) {
        TokenKind::Punct
    } else if is_integer(word) {
        TokenKind::Integer
    } else if KEYWORDS.contains(&word) {
        TokenKind::Keyword
    } else {
        TokenKind::Identifier
    }
}

/// Tokenize DEF text from a reader. Comment lines (leading `#`) are dropped.
pub fn tokenize_def(input: impl BufRead) -> Result<Vec<DefToken>> {
    let mut tokens = Vec::new();
    let mut line_no: u32 = 0;
    let mut buf = Vec::new();
    let mut input = input;
    loop {
        buf.clear();
        let n = input
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io("<def input>", e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|e| Error::MalformedToken {
            line: line_no,
            detail: format!("invalid UTF-8 at byte offset {}", e.valid_up_to()),
        })?;
        let line = line.trim_start();
        if line.starts_with('#') {
            continue;
        }
        for word in line.split_ascii_whitespace() {
            tokens.push(DefToken {
                kind: classify(word),
                text: word.to_string(),
                line: line_no,
            });
        }
    }
    Ok(tokens)
}

/// Convenience entry point for in-memory text.
pub fn tokenize_str(input: &str) -> Result<Vec<DefToken>> {
    tokenize_def(input.as_bytes())
}
