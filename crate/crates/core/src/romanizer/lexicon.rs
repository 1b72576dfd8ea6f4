use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use super::morphology::{
    starter_affixes, strip_affixes, AffixTemplate, MorphologyError, Segmentation,
};
use super::OtWord;
use crate::text::{nfc, turkish_lowercase};

const BUILTIN_EXCEPTIONS: &str = include_str!("../../data/exceptions.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Affix {
        line: usize,
        #[source]
        source: MorphologyError,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn read(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Modern Turkish stems, attested full forms and a suffix inventory.
///
/// Text format, one entry per line:
///
/// ```text
/// # comment
/// gel            a stem
/// kütübhâne      another stem
/// ulemâ<TAB>full an inflected form listed whole
/// -DI            a suffix template
/// ```
///
/// When the file declares no suffix templates the starter inventory is used.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    stems: BTreeSet<String>,
    full_forms: BTreeSet<String>,
    affixes: Vec<AffixTemplate>,
}

impl Lexicon {
    pub fn new<S, F>(stems: S, full_forms: F, affixes: Vec<AffixTemplate>) -> Self
    where
        S: IntoIterator,
        S::Item: AsRef<str>,
        F: IntoIterator,
        F::Item: AsRef<str>,
    {
        Self {
            stems: stems
                .into_iter()
                .map(|s| normalize_entry(s.as_ref()))
                .collect(),
            full_forms: full_forms
                .into_iter()
                .map(|s| normalize_entry(s.as_ref()))
                .collect(),
            affixes,
        }
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let entry = cols.next().unwrap_or_default().trim();
            let kind = cols.next().map(str::trim);
            if cols.next().is_some() {
                return Err(LexiconError::Syntax {
                    line: idx + 1,
                    message: "too many columns".into(),
                });
            }
            match kind {
                None if entry.starts_with('-') => {
                    let affix = entry.parse().map_err(|source| LexiconError::Affix {
                        line: idx + 1,
                        source,
                    })?;
                    lex.affixes.push(affix);
                }
                None => {
                    lex.stems.insert(normalize_entry(entry));
                }
                Some("full") => {
                    lex.full_forms.insert(normalize_entry(entry));
                }
                Some(other) => {
                    return Err(LexiconError::Syntax {
                        line: idx + 1,
                        message: format!("unknown entry kind {other:?}"),
                    })
                }
            }
        }
        if lex.affixes.is_empty() {
            lex.affixes = starter_affixes();
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::parse(&read(path)?)
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty() && self.full_forms.is_empty()
    }

    pub fn stems(&self) -> &BTreeSet<String> {
        &self.stems
    }

    pub fn full_forms(&self) -> &BTreeSet<String> {
        &self.full_forms
    }

    pub fn affixes(&self) -> &[AffixTemplate] {
        &self.affixes
    }

    fn knows(&self, word: &str) -> bool {
        self.stems.contains(word) || self.full_forms.contains(word)
    }

    /// Segmentations of `surface` into a known stem (or full form) plus suffixes.
    pub fn strip_affixes(&self, surface: &str) -> BTreeSet<Segmentation> {
        strip_affixes(surface, &self.affixes, |s| self.knows(s))
    }

    /// True if `surface` is listed or segments into a listed word plus suffixes.
    pub fn accepts(&self, surface: &str) -> bool {
        let word = normalize_entry(surface);
        self.knows(&word) || !self.strip_affixes(&word).is_empty()
    }
}

fn normalize_entry(s: &str) -> String {
    turkish_lowercase(&nfc(s.trim()))
}

/// Conventional readings that replace generated candidates outright.
///
/// Text format: `OT-word<TAB>MT-surface`, `#` comments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExceptionLexicon {
    entries: BTreeMap<String, String>,
}

impl ExceptionLexicon {
    /// The two conventional readings shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_EXCEPTIONS).expect("built-in exceptions are well formed")
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((ot, mt)) = line.split_once('\t') else {
                return Err(LexiconError::Syntax {
                    line: idx + 1,
                    message: "expected OT-word<TAB>MT-surface".into(),
                });
            };
            let (ot, mt) = (nfc(ot.trim()), nfc(mt.trim()));
            if ot.is_empty() || mt.is_empty() || mt.contains('\t') {
                return Err(LexiconError::Syntax {
                    line: idx + 1,
                    message: "empty or malformed entry".into(),
                });
            }
            entries.insert(ot, mt);
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::parse(&read(path)?)
    }

    pub fn insert(&mut self, ot: &str, mt: &str) {
        self.entries.insert(nfc(ot), nfc(mt));
    }

    pub fn get(&self, word: &OtWord) -> Option<&str> {
        self.entries.get(&word.to_string()).map(String::as_str)
    }

    /// Entries as `(OT word, MT surface)`, ordered by OT word.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lexicon_file() {
        let lex = Lexicon::parse("# stems\ngel\nÜç\nulemâ\tfull\n\n-DI\n-lAr\n").unwrap();
        assert!(lex.stems().contains("gel"));
        assert!(lex.stems().contains("üç"));
        assert!(lex.full_forms().contains("ulemâ"));
        assert_eq!(lex.affixes().len(), 2);
        assert!(lex.accepts("geldiler"));
        assert!(lex.accepts("Gel"));
        assert!(!lex.accepts("gitti"));
    }

    #[test]
    fn starter_affixes_by_default() {
        let lex = Lexicon::parse("ol\n").unwrap();
        assert_eq!(lex.affixes().len(), 6);
        assert!(lex.accepts("oldi"));
        assert!(lex.accepts("oldu"));
    }

    #[test]
    fn lexicon_syntax_errors() {
        assert!(matches!(
            Lexicon::parse("a\tstem\n"),
            Err(LexiconError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            Lexicon::parse("a\n-Q\n"),
            Err(LexiconError::Affix { line: 2, .. })
        ));
        assert!(matches!(
            Lexicon::parse("a\tfull\tx\n"),
            Err(LexiconError::Syntax { .. })
        ));
    }

    #[test]
    fn exceptions() {
        let ex = ExceptionLexicon::builtin();
        assert_eq!(ex.len(), 2);
        assert!(ExceptionLexicon::parse("no tab here\n").is_err());
        let ex = ExceptionLexicon::parse("# c\nعلم\tilim\n").unwrap();
        assert_eq!(ex.len(), 1);
    }
}
