//! Unicode to ASCII translation.
//!
//! Each character goes through three steps: an explicit table (typographic
//! punctuation, Greek letters, common symbols), then compatibility
//! decomposition with combining marks dropped, then `?` as a last resort.
//! The table can be extended or overridden from a file with one
//! `U+XXXX<TAB>replacement` mapping per line.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;
use unicode_normalization::char::{decompose_compatible, is_combining_mark};

use crate::model::{self, Annotation, Document, InfonMap, Relation};

/// Text encoding of served or converted documents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Encoding {
    #[default]
    Unicode,
    Ascii,
}

impl Encoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::Unicode => "unicode",
            Encoding::Ascii => "ascii",
        }
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unicode" => Ok(Encoding::Unicode),
            "ascii" => Ok(Encoding::Ascii),
            other => Err(format!("unknown encoding {other:?} (expected unicode or ascii)")),
        }
    }
}

/// Replacement for characters with no ASCII rendering.
pub const UNKNOWN: &str = "?";

#[derive(Debug, Error)]
pub enum TranslitError {
    #[error("line {line}: expected `U+XXXX<TAB>replacement`")]
    Syntax { line: usize },
    #[error("line {line}: replacement for U+{code:04X} is not ASCII")]
    NonAscii { line: usize, code: u32 },
    #[error("replacement for U+{0:04X} is not ASCII")]
    NonAsciiEntry(u32),
    #[error("reading table: {0}")]
    Io(#[from] std::io::Error),
}

const GREEK: [&str; 25] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
    "lambda", "mu", "nu", "xi", "omicron", "pi", "rho", "sigma", "sigma", "tau", "upsilon",
    "phi", "chi", "psi", "omega",
];

const SYMBOLS: &[(char, &str)] = &[
    // quotes and primes
    ('\u{2018}', "'"),
    ('\u{2019}', "'"),
    ('\u{201A}', "'"),
    ('\u{201B}', "'"),
    ('\u{2032}', "'"),
    ('\u{00B4}', "'"),
    ('\u{201C}', "\""),
    ('\u{201D}', "\""),
    ('\u{201E}', "\""),
    ('\u{201F}', "\""),
    ('\u{2033}', "\""),
    ('\u{00AB}', "\""),
    ('\u{00BB}', "\""),
    // dashes
    ('\u{2010}', "-"),
    ('\u{2011}', "-"),
    ('\u{2012}', "-"),
    ('\u{2013}', "-"),
    ('\u{2014}', "-"),
    ('\u{2015}', "-"),
    ('\u{2212}', "-"),
    ('\u{2026}', "..."),
    // spaces
    ('\u{00A0}', " "),
    ('\u{2002}', " "),
    ('\u{2003}', " "),
    ('\u{2009}', " "),
    ('\u{200A}', " "),
    ('\u{202F}', " "),
    ('\u{200B}', ""),
    ('\u{FEFF}', ""),
    ('\u{00AD}', ""),
    // math and units
    ('\u{00D7}', "x"),
    ('\u{00B0}', " degrees"),
    ('\u{00B5}', "mu"),
    ('\u{00B1}', "+/-"),
    ('\u{2264}', "<="),
    ('\u{2265}', ">="),
    ('\u{2260}', "!="),
    ('\u{2248}', "~"),
    ('\u{223C}', "~"),
    ('\u{00F7}', "/"),
    ('\u{2044}', "/"),
    ('\u{2215}', "/"),
    ('\u{00B7}', "."),
    ('\u{2022}', "*"),
    ('\u{2192}', "->"),
    ('\u{2190}', "<-"),
    ('\u{2194}', "<->"),
    ('\u{2191}', "^"),
    ('\u{2193}', "v"),
    ('\u{221E}', "infinity"),
    ('\u{2030}', "per mille"),
    ('\u{00A9}', "(c)"),
    ('\u{00AE}', "(R)"),
    ('\u{00A7}', "S"),
    ('\u{00B6}', "P"),
    ('\u{2020}', "+"),
    ('\u{2021}', "++"),
    // Latin letters without a decomposition
    ('\u{00DF}', "ss"),
    ('\u{00E6}', "ae"),
    ('\u{00C6}', "AE"),
    ('\u{0153}', "oe"),
    ('\u{0152}', "OE"),
    ('\u{00F8}', "o"),
    ('\u{00D8}', "O"),
    ('\u{0142}', "l"),
    ('\u{0141}', "L"),
    ('\u{0111}', "d"),
    ('\u{0110}', "D"),
    ('\u{00F0}', "d"),
    ('\u{00D0}', "D"),
    ('\u{00FE}', "th"),
    ('\u{00DE}', "Th"),
    ('\u{0131}', "i"),
    // Greek letter variants
    ('\u{03D1}', "theta"),
    ('\u{03D5}', "phi"),
    ('\u{03F5}', "epsilon"),
    ('\u{03D6}', "pi"),
    ('\u{03F1}', "rho"),
    ('\u{03F0}', "kappa"),
];

/// Code point to ASCII replacement map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslitTable {
    entries: HashMap<char, String>,
}

impl Default for TranslitTable {
    fn default() -> Self {
        Self::standard().clone()
    }
}

impl TranslitTable {
    pub fn empty() -> Self {
        Self {
            entries: HashMap::new(),
        }
    }

    /// The built-in table.
    pub fn standard() -> &'static TranslitTable {
        static TABLE: OnceLock<TranslitTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let mut entries = HashMap::new();
            for (i, name) in GREEK.iter().enumerate() {
                let lower = char::from_u32(0x03B1 + i as u32).unwrap();
                entries.insert(lower, name.to_string());
                // U+03A2 is unassigned; it sits opposite final sigma.
                if let Some(upper) = char::from_u32(0x0391 + i as u32).filter(|&c| c != '\u{03A2}') {
                    entries.insert(upper, name.to_string());
                }
            }
            for &(c, r) in SYMBOLS {
                entries.insert(c, r.to_string());
            }
            TranslitTable { entries }
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, c: char) -> Option<&str> {
        self.entries.get(&c).map(String::as_str)
    }

    pub fn insert(&mut self, c: char, replacement: impl Into<String>) -> Result<(), TranslitError> {
        let replacement = replacement.into();
        if !replacement.is_ascii() {
            return Err(TranslitError::NonAsciiEntry(c as u32));
        }
        self.entries.insert(c, replacement);
        Ok(())
    }

    /// Applies `U+XXXX<TAB>replacement` lines on top of this table. Blank
    /// lines and lines starting with `#` are skipped.
    pub fn apply_overrides(&mut self, text: &str) -> Result<(), TranslitError> {
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (code, replacement) = line
                .split_once('\t')
                .ok_or(TranslitError::Syntax { line: line_no })?;
            let c = code
                .trim()
                .strip_prefix("U+")
                .and_then(|hex| u32::from_str_radix(hex, 16).ok())
                .and_then(char::from_u32)
                .ok_or(TranslitError::Syntax { line: line_no })?;
            if !replacement.is_ascii() {
                return Err(TranslitError::NonAscii {
                    line: line_no,
                    code: c as u32,
                });
            }
            self.entries.insert(c, replacement.to_string());
        }
        Ok(())
    }

    /// The standard table with the overrides in `path` applied.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TranslitError> {
        let text = std::fs::read_to_string(path)?;
        let mut table = Self::default();
        table.apply_overrides(&text)?;
        Ok(table)
    }

    fn push_char(&self, c: char, out: &mut String) {
        if c.is_ascii() {
            out.push(c);
            return;
        }
        if let Some(r) = self.get(c) {
            out.push_str(r);
            return;
        }
        if is_combining_mark(c) {
            return;
        }
        let start = out.len();
        decompose_compatible(c, |d| {
            if d.is_ascii() {
                out.push(d);
            } else if let Some(r) = self.get(d) {
                out.push_str(r);
            }
        });
        if out.len() == start {
            out.push_str(UNKNOWN);
        }
    }

    pub fn to_ascii(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        for c in text.chars() {
            self.push_char(c, &mut out);
        }
        out
    }

    /// Like [`to_ascii`](Self::to_ascii), also returning where each input
    /// character starts in the output (in code points). The map has one
    /// extra trailing entry holding the output length.
    pub fn to_ascii_mapped(&self, text: &str) -> (String, Vec<usize>) {
        let mut out = String::with_capacity(text.len());
        let mut map = Vec::with_capacity(text.len() + 1);
        for c in text.chars() {
            // Output is pure ASCII, so its byte length is its code point length.
            map.push(out.len());
            self.push_char(c, &mut out);
        }
        map.push(out.len());
        (out, map)
    }

    /// Transliterates every text and infon value of `doc`, keeps stand-off
    /// locations on the same characters, then lays passages out again with
    /// `separator`.
    pub fn ascii_document(&self, mut doc: Document, separator: usize) -> Document {
        self.ascii_infons(&mut doc.infons);
        self.ascii_relations(&mut doc.relations);
        for passage in &mut doc.passages {
            self.ascii_infons(&mut passage.infons);
            self.ascii_relations(&mut passage.relations);
            let base = passage.offset;
            let (text, map) = self.to_ascii_mapped(&passage.text);
            let remap = |o: usize| -> usize {
                let rel = o.saturating_sub(base).min(map.len() - 1);
                base + map[rel]
            };
            for sentence in &mut passage.sentences {
                let start = remap(sentence.offset);
                let end = remap(sentence.offset + model::codepoint_length(&sentence.text));
                sentence.offset = start;
                sentence.text = text.get(start - base..end - base).unwrap_or_default().to_string();
                self.ascii_infons(&mut sentence.infons);
                self.ascii_relations(&mut sentence.relations);
                self.remap_annotations(&mut sentence.annotations, &remap);
            }
            self.remap_annotations(&mut passage.annotations, &remap);
            passage.text = text;
        }
        model::recompute_offsets(doc, separator)
    }

    fn remap_annotations(&self, annotations: &mut [Annotation], remap: &impl Fn(usize) -> usize) {
        for ann in annotations {
            for loc in &mut ann.locations {
                let start = remap(loc.offset);
                let end = remap(loc.end());
                loc.offset = start;
                loc.length = end - start;
            }
            ann.text = self.to_ascii(&ann.text);
            self.ascii_infons(&mut ann.infons);
        }
    }

    fn ascii_infons(&self, infons: &mut InfonMap) {
        if infons.iter().all(|(_, v)| v.is_ascii()) {
            return;
        }
        *infons = infons.iter().map(|(k, v)| (k, self.to_ascii(v))).collect();
    }

    fn ascii_relations(&self, relations: &mut [Relation]) {
        for rel in relations {
            self.ascii_infons(&mut rel.infons);
        }
    }
}

/// Transliterates with the built-in table.
pub fn to_ascii(text: &str) -> String {
    TranslitTable::standard().to_ascii(text)
}
