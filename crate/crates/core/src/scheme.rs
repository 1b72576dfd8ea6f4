//! Transcription schemes and the Ottoman-to-Latin correspondence table.
//!
//! A [`SchemeTable`] is loaded from a JSON data file so that scholars can
//! amend alternatives or add schemes without touching code. The built-in
//! table ships in `data/schemes/ottoman.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_segmentation::UnicodeSegmentation;

use crate::text::{nfc, turkish_lowercase};

const BUILTIN_TABLE: &str = include_str!("../data/schemes/ottoman.json");

/// File name looked up inside a scheme-data directory.
pub const SCHEME_FILE_NAME: &str = "ottoman.json";

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("unknown Ottoman letter {0:?} (U+{code:04X})", code = *.0 as u32)]
    UnknownLetter(char),
    #[error("unsupported scheme conversion {from} -> {to}")]
    UnknownScheme { from: SchemeId, to: SchemeId },
    #[error("scheme {0} has no alphabet in this table")]
    NoAlphabet(SchemeId),
    #[error("invalid scheme table: {0}")]
    InvalidTable(String),
    #[error("cannot parse scheme table: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot read scheme table {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A Latin transcription scheme.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum SchemeId {
    /// Islam Ansiklopedisi: diacritics distinguish polyphonic letters.
    Ia,
    /// Marks long vowels only.
    Loose,
    Custom(String),
}

impl SchemeId {
    pub fn key(&self) -> &str {
        match self {
            SchemeId::Ia => "ia",
            SchemeId::Loose => "loose",
            SchemeId::Custom(name) => name,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SchemeId {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ia" => SchemeId::Ia,
            "loose" => SchemeId::Loose,
            _ => SchemeId::Custom(s.to_owned()),
        })
    }
}

impl From<String> for SchemeId {
    fn from(s: String) -> Self {
        s.parse().unwrap_or(SchemeId::Custom(s))
    }
}

impl From<SchemeId> for String {
    fn from(id: SchemeId) -> Self {
        id.key().to_owned()
    }
}

/// Where a table row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// One of the six polyphonic rows of the correspondence chart.
    Fig1,
    /// Alternative code point for a chart letter (e.g. keheh for kaf).
    Fig1Variant,
    /// Taken from the full IA transcription chart.
    IaChart,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetterEntry {
    pub alternatives: Vec<String>,
    pub provenance: Provenance,
}

/// One character outside a scheme's alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line number.
    pub line: usize,
    /// 1-based grapheme column.
    pub column: usize,
    pub grapheme: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {:?} is outside the scheme alphabet",
            self.line, self.column, self.grapheme
        )
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct SchemeFile {
    format: String,
    version: u32,
    name: String,
    ot_to_latin: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    provenance: BTreeMap<String, Provenance>,
    default_provenance: Provenance,
    #[serde(default)]
    word_initial: BTreeMap<String, Vec<String>>,
    vowel_letters: Vec<String>,
    mt_vowels: Vec<String>,
    strip: BTreeMap<String, String>,
    alphabets: BTreeMap<String, Vec<String>>,
}

/// Immutable Ottoman-to-Latin table plus scheme alphabets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeTable {
    name: String,
    letters: BTreeMap<char, LetterEntry>,
    word_initial: BTreeMap<char, Vec<String>>,
    vowel_letters: Vec<char>,
    mt_vowels: Vec<char>,
    strip: BTreeMap<String, String>,
    alphabets: BTreeMap<String, BTreeSet<String>>,
}

fn single_char(s: &str, what: &str) -> Result<char, SchemeError> {
    let s = nfc(s);
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(SchemeError::InvalidTable(format!(
            "{what} {s:?} is not a single code point"
        ))),
    }
}

impl SchemeTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_TABLE).expect("built-in scheme table is valid")
    }

    pub fn load(path: &Path) -> Result<Self, SchemeError> {
        let text = std::fs::read_to_string(path).map_err(|source| SchemeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Loads `ottoman.json` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, SchemeError> {
        Self::load(&dir.join(SCHEME_FILE_NAME))
    }

    pub fn from_json(text: &str) -> Result<Self, SchemeError> {
        let file: SchemeFile = serde_json::from_str(text)?;
        if file.format != "otkit-scheme" || file.version != 1 {
            return Err(SchemeError::InvalidTable(format!(
                "unsupported format {:?} version {}",
                file.format, file.version
            )));
        }

        let mut letters = BTreeMap::new();
        for (key, alts) in &file.ot_to_latin {
            let letter = single_char(key, "OT letter")?;
            if alts.is_empty() {
                return Err(SchemeError::InvalidTable(format!(
                    "{key} has no alternatives"
                )));
            }
            let provenance = file
                .provenance
                .get(key)
                .copied()
                .unwrap_or(file.default_provenance);
            let alternatives = alts.iter().map(|a| nfc(a)).collect();
            letters.insert(
                letter,
                LetterEntry {
                    alternatives,
                    provenance,
                },
            );
        }
        for key in file.provenance.keys() {
            if !file.ot_to_latin.contains_key(key) {
                return Err(SchemeError::InvalidTable(format!(
                    "provenance for unknown letter {key}"
                )));
            }
        }

        let mut word_initial = BTreeMap::new();
        for (key, alts) in &file.word_initial {
            let letter = single_char(key, "OT letter")?;
            if !letters.contains_key(&letter) || alts.is_empty() {
                return Err(SchemeError::InvalidTable(format!(
                    "bad word-initial row {key}"
                )));
            }
            word_initial.insert(letter, alts.iter().map(|a| nfc(a)).collect());
        }

        let vowel_letters = file
            .vowel_letters
            .iter()
            .map(|v| single_char(v, "vowel letter"))
            .collect::<Result<Vec<_>, _>>()?;
        let mt_vowels = file
            .mt_vowels
            .iter()
            .map(|v| single_char(v, "MT vowel"))
            .collect::<Result<Vec<_>, _>>()?;
        if mt_vowels.iter().collect::<BTreeSet<_>>().len() != 8 || mt_vowels.len() != 8 {
            return Err(SchemeError::InvalidTable(
                "mt_vowels must list eight distinct vowels".into(),
            ));
        }

        let strip: BTreeMap<String, String> =
            file.strip.iter().map(|(k, v)| (nfc(k), nfc(v))).collect();
        for (from, to) in &strip {
            if ["â", "î", "û", "Â", "Î", "Û"].contains(&from.as_str()) {
                return Err(SchemeError::InvalidTable(format!(
                    "long vowel {from} must not be stripped"
                )));
            }
            if strip.contains_key(to) {
                return Err(SchemeError::InvalidTable(format!(
                    "strip target {to:?} is itself stripped"
                )));
            }
        }

        let alphabets = file
            .alphabets
            .iter()
            .map(|(name, graphemes)| {
                let set = graphemes.iter().map(|g| nfc(g)).collect();
                (name.to_ascii_lowercase(), set)
            })
            .collect();

        Ok(Self {
            name: file.name,
            letters,
            word_initial,
            vowel_letters,
            mt_vowels,
            strip,
            alphabets,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// All OT letters in code point order.
    pub fn ot_letters(&self) -> impl Iterator<Item = char> + '_ {
        self.letters.keys().copied()
    }

    pub fn entry(&self, letter: char) -> Option<&LetterEntry> {
        self.letters.get(&letter)
    }

    pub fn contains_letter(&self, letter: char) -> bool {
        self.letters.contains_key(&letter)
    }

    /// Alternatives for `letter`, in generation priority order.
    pub fn ot_letter_candidates(&self, letter: char) -> Result<&[String], SchemeError> {
        self.letters
            .get(&letter)
            .map(|e| e.alternatives.as_slice())
            .ok_or(SchemeError::UnknownLetter(letter))
    }

    /// Alternatives when `letter` opens a word; falls back to the general row.
    pub fn word_initial_candidates(&self, letter: char) -> Result<&[String], SchemeError> {
        match self.word_initial.get(&letter) {
            Some(alts) => Ok(alts),
            None => self.ot_letter_candidates(letter),
        }
    }

    pub fn has_word_initial_row(&self, letter: char) -> bool {
        self.word_initial.contains_key(&letter)
    }

    pub fn vowel_letters(&self) -> &[char] {
        &self.vowel_letters
    }

    pub fn mt_vowels(&self) -> &[char] {
        &self.mt_vowels
    }

    pub fn strip_map(&self) -> &BTreeMap<String, String> {
        &self.strip
    }

    pub fn alphabet(&self, scheme: &SchemeId) -> Option<&BTreeSet<String>> {
        self.alphabets.get(&scheme.key().to_ascii_lowercase())
    }

    /// Converts Latin transcription text between schemes.
    ///
    /// IA → Loose replaces every diacritic-marked grapheme through the strip
    /// map and keeps everything else. Converting a scheme to itself is the
    /// identity.
    pub fn convert_scheme(
        &self,
        text: &str,
        from: &SchemeId,
        to: &SchemeId,
    ) -> Result<String, SchemeError> {
        if from == to {
            return Ok(nfc(text));
        }
        if !(*from == SchemeId::Ia && *to == SchemeId::Loose) {
            return Err(SchemeError::UnknownScheme {
                from: from.clone(),
                to: to.clone(),
            });
        }
        let normalized = nfc(text);
        let mut out = String::with_capacity(normalized.len());
        for g in normalized.graphemes(true) {
            match self.strip.get(g) {
                Some(replacement) => out.push_str(replacement),
                None => out.push_str(g),
            }
        }
        Ok(out)
    }

    /// Reports every letter-like grapheme outside `scheme`'s alphabet.
    ///
    /// Digits, punctuation and whitespace are always accepted. Letters are
    /// compared after Turkish lowercasing.
    pub fn validate_scheme_text(
        &self,
        text: &str,
        scheme: &SchemeId,
    ) -> Result<Vec<Diagnostic>, SchemeError> {
        let alphabet = self
            .alphabet(scheme)
            .ok_or_else(|| SchemeError::NoAlphabet(scheme.clone()))?;
        let mut diagnostics = Vec::new();
        for (line_idx, line) in nfc(text).split('\n').enumerate() {
            for (col, g) in line.graphemes(true).enumerate() {
                if !is_letter_like(g) {
                    continue;
                }
                if alphabet.contains(g) || alphabet.contains(&turkish_lowercase(g)) {
                    continue;
                }
                diagnostics.push(Diagnostic {
                    line: line_idx + 1,
                    column: col + 1,
                    grapheme: g.to_owned(),
                });
            }
        }
        Ok(diagnostics)
    }
}

fn is_letter_like(g: &str) -> bool {
    g.chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || is_combining_mark(c))
}
