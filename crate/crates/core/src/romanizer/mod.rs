//! Candidate romanization of Ottoman Turkish words.
//!
//! The pipeline for one word:
//!
//! 1. an [`ExceptionLexicon`] entry, when present, is the only answer;
//! 2. otherwise [`generate_candidates`] enumerates character-accurate readings,
//!    keeping everything that survives the beam;
//! 3. readings found in the [`Lexicon`], directly or after suffix stripping,
//!    are kept; if none are found and the beam overflowed, the search is
//!    repeated with a doubled beam, up to [`BEAM_WIDENINGS`] times; if still
//!    none are found every reading is kept;
//! 4. the survivors are rescored with the language model, when one is given,
//!    sorted best first with ties broken by surface, and cut to
//!    `max_candidates`.

mod generate;
mod lexicon;
pub mod morphology;

use std::fmt;

use thiserror::Error;

pub use generate::{generate_candidates, Generation, INSERTION_PENALTY};
pub use lexicon::{ExceptionLexicon, Lexicon, LexiconError};
pub use morphology::{
    apply_harmony, check_vowel_harmony, AffixTemplate, MorphologyError, Segmentation,
};

use crate::lm::{self, NgramModel, RescoreConfig};
use crate::scheme::{SchemeError, SchemeTable};
use crate::text::nfc;

#[derive(Debug, Error)]
pub enum RomanizeError {
    #[error("empty word")]
    EmptyWord,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("invalid generation limits: {0}")]
    InvalidLimits(&'static str),
}

/// An Ottoman word as a sequence of Arabic-script letters in reading order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OtWord(Vec<char>);

impl OtWord {
    /// NFC-normalizes `text`, drops joiners and tatweel, and checks every
    /// letter against `table`.
    pub fn parse(text: &str, table: &SchemeTable) -> Result<Self, RomanizeError> {
        let letters: Vec<char> = nfc(text.trim())
            .chars()
            .filter(|c| !matches!(c, '\u{200C}' | '\u{200D}' | '\u{0640}'))
            .collect();
        if letters.is_empty() {
            return Err(RomanizeError::EmptyWord);
        }
        if let Some(&bad) = letters.iter().find(|c| !table.contains_letter(**c)) {
            return Err(SchemeError::UnknownLetter(bad).into());
        }
        Ok(Self(letters))
    }

    pub fn letters(&self) -> &[char] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for OtWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

/// One step of a candidate's derivation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TraceStep {
    /// An OT letter and the Latin grapheme chosen for it (possibly empty).
    Letter { letter: char, realization: String },
    /// A vowel the script left unwritten.
    Inserted(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Generated,
    Exception,
}

/// A scored romanization hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub surface: String,
    pub trace: Vec<TraceStep>,
    /// Natural-log generation prior.
    pub gen_score: f64,
    /// Natural-log language-model probability; zero until rescored.
    pub lm_score: f64,
    pub total: f64,
    pub origin: Origin,
}

impl Candidate {
    fn exception(surface: &str) -> Self {
        Self {
            surface: surface.to_owned(),
            trace: Vec::new(),
            gen_score: 0.0,
            lm_score: 0.0,
            total: 0.0,
            origin: Origin::Exception,
        }
    }

    /// The OT letters recovered from the trace, in order.
    pub fn source_letters(&self) -> Vec<char> {
        self.trace
            .iter()
            .filter_map(|s| match s {
                TraceStep::Letter { letter, .. } => Some(*letter),
                TraceStep::Inserted(_) => None,
            })
            .collect()
    }

    pub fn insertions(&self) -> usize {
        self.trace
            .iter()
            .filter(|s| matches!(s, TraceStep::Inserted(_)))
            .count()
    }

    /// The surface rebuilt from the trace.
    pub fn traced_surface(&self) -> String {
        let mut out = String::new();
        for step in &self.trace {
            match step {
                TraceStep::Letter { realization, .. } => out.push_str(realization),
                TraceStep::Inserted(v) => out.push(*v),
            }
        }
        out
    }
}

/// Bounds on the candidate search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenLimits {
    pub max_insertions: usize,
    pub beam: usize,
    pub max_candidates: usize,
}

impl GenLimits {
    pub const DEFAULT_BEAM: usize = 500;
    pub const DEFAULT_MAX_CANDIDATES: usize = 50;

    /// Defaults for `word`: up to one inserted vowel per two letters, rounded up.
    pub fn for_word(word: &OtWord) -> Self {
        Self {
            max_insertions: word.len().div_ceil(2),
            beam: Self::DEFAULT_BEAM,
            max_candidates: Self::DEFAULT_MAX_CANDIDATES,
        }
    }

    pub fn validate(&self) -> Result<(), RomanizeError> {
        if self.beam == 0 {
            return Err(RomanizeError::InvalidLimits("beam must be positive"));
        }
        if self.max_candidates == 0 {
            return Err(RomanizeError::InvalidLimits(
                "max_candidates must be positive",
            ));
        }
        Ok(())
    }
}

/// How many times [`Romanizer::romanize`] doubles the beam when no
/// candidate is found in the lexicon.
pub const BEAM_WIDENINGS: usize = 3;

/// Loaded resources for romanizing words.
#[derive(Debug, Clone, Copy)]
pub struct Romanizer<'a> {
    pub table: &'a SchemeTable,
    pub lexicon: &'a Lexicon,
    pub exceptions: &'a ExceptionLexicon,
    pub model: Option<&'a NgramModel>,
    pub rescore: RescoreConfig,
}

impl<'a> Romanizer<'a> {
    /// Ranked candidates for `word`, best first.
    ///
    /// `limits` defaults to [`GenLimits::for_word`].
    pub fn romanize(
        &self,
        word: &OtWord,
        limits: Option<GenLimits>,
    ) -> Result<Vec<Candidate>, RomanizeError> {
        if let Some(surface) = self.exceptions.get(word) {
            return Ok(vec![Candidate::exception(surface)]);
        }
        let limits = limits.unwrap_or_else(|| GenLimits::for_word(word));
        let pool = self.lexicon_pool(word, &limits)?;

        let mut ranked = match self.model {
            Some(model) => lm::rescore(pool, model, &self.rescore),
            None => rank_by_generation(pool),
        };
        ranked.truncate(limits.max_candidates);
        Ok(ranked)
    }

    fn lexicon_pool(
        &self,
        word: &OtWord,
        limits: &GenLimits,
    ) -> Result<Vec<Candidate>, RomanizeError> {
        let mut beam = limits.beam;
        let mut first = None;
        for round in 0..=BEAM_WIDENINGS {
            let search = GenLimits {
                beam,
                max_candidates: beam.max(limits.max_candidates),
                ..*limits
            };
            let generation = generate_candidates(word, self.table, &search)?;
            let known: Vec<Candidate> = generation
                .candidates
                .iter()
                .filter(|c| self.lexicon.accepts(&c.surface))
                .cloned()
                .collect();
            if !known.is_empty() {
                return Ok(known);
            }
            let truncated = generation.beam_truncated;
            first.get_or_insert(generation.candidates);
            if !truncated || self.lexicon.is_empty() || round == BEAM_WIDENINGS {
                break;
            }
            beam = beam.saturating_mul(2);
        }
        Ok(first.unwrap_or_default())
    }

    /// Parses `text` as an OT word and romanizes it.
    pub fn romanize_str(
        &self,
        text: &str,
        limits: Option<GenLimits>,
    ) -> Result<Vec<Candidate>, RomanizeError> {
        let word = OtWord::parse(text, self.table)?;
        self.romanize(&word, limits)
    }
}

fn rank_by_generation(mut pool: Vec<Candidate>) -> Vec<Candidate> {
    for c in &mut pool {
        c.lm_score = 0.0;
        c.total = c.gen_score;
    }
    pool.sort_by(|a, b| {
        b.total
            .total_cmp(&a.total)
            .then_with(|| a.surface.cmp(&b.surface))
    });
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str, t: &SchemeTable) -> OtWord {
        OtWord::parse(s, t).unwrap()
    }

    fn wide(w: &OtWord) -> GenLimits {
        GenLimits {
            max_candidates: 500,
            ..GenLimits::for_word(w)
        }
    }

    fn surfaces(g: &Generation) -> Vec<&str> {
        g.candidates.iter().map(|c| c.surface.as_str()).collect()
    }

    #[test]
    fn parses_ot_words() {
        let t = SchemeTable::builtin();
        assert_eq!(word("عمله", &t).len(), 4);
        assert_eq!(word("عـمله", &t).len(), 4);
        assert!(matches!(
            OtWord::parse("  ", &t),
            Err(RomanizeError::EmptyWord)
        ));
        assert!(matches!(
            OtWord::parse("abc", &t),
            Err(RomanizeError::Scheme(SchemeError::UnknownLetter('a')))
        ));
    }

    #[test]
    fn default_limits() {
        let t = SchemeTable::builtin();
        let l = GenLimits::for_word(&word("عمله", &t));
        assert_eq!((l.max_insertions, l.beam, l.max_candidates), (2, 500, 50));
        assert_eq!(GenLimits::for_word(&word("ب", &t)).max_insertions, 1);
        assert!(GenLimits { beam: 0, ..l }.validate().is_err());
    }

    #[test]
    fn both_readings_of_amele_are_generated() {
        let t = SchemeTable::builtin();
        let w = word("عمله", &t);
        let g = generate_candidates(&w, &t, &wide(&w)).unwrap();
        let s = surfaces(&g);
        assert!(s.contains(&"imle"), "{s:?}");
        assert!(s.contains(&"amele"), "{s:?}");
        let amele = g.candidates.iter().find(|c| c.surface == "amele").unwrap();
        assert_eq!(amele.insertions(), 1);
    }

    #[test]
    fn archaic_past_tense_is_generated() {
        let t = SchemeTable::builtin();
        let w = word("الدى", &t);
        let g = generate_candidates(
            &w,
            &t,
            &GenLimits {
                beam: 2000,
                max_candidates: 2000,
                ..wide(&w)
            },
        )
        .unwrap();
        assert!(surfaces(&g).contains(&"oldi"));
        let w = word("اوچونجی", &t);
        let limits = GenLimits {
            max_insertions: 0,
            beam: 1000,
            max_candidates: 1000,
        };
        let g = generate_candidates(&w, &t, &limits).unwrap();
        assert!(surfaces(&g).contains(&"üçünci"), "{:?}", surfaces(&g));
    }

    #[test]
    fn exceptions_short_circuit() {
        let t = SchemeTable::builtin();
        let lex = Lexicon::default();
        let ex = ExceptionLexicon::builtin();
        let r = Romanizer {
            table: &t,
            lexicon: &lex,
            exceptions: &ex,
            model: None,
            rescore: RescoreConfig::default(),
        };
        let got = r.romanize_str("خواجه", None).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].surface, "hoca");
        assert_eq!(got[0].origin, Origin::Exception);
        let got = r.romanize_str("کوکرجین", None).unwrap();
        assert_eq!(got[0].surface, "güvercin");
    }

    #[test]
    fn lexicon_filters_but_never_empties() {
        let t = SchemeTable::builtin();
        let ex = ExceptionLexicon::default();
        let lex = Lexicon::parse("amele\n").unwrap();
        let r = Romanizer {
            table: &t,
            lexicon: &lex,
            exceptions: &ex,
            model: None,
            rescore: RescoreConfig::default(),
        };
        let got = r.romanize_str("عمله", None).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].surface, "amele");

        let lex = Lexicon::parse("kalem\n").unwrap();
        let r = Romanizer { lexicon: &lex, ..r };
        let got = r.romanize_str("عمله", None).unwrap();
        assert!(got.len() > 1);
    }

    #[test]
    fn lexicon_accepts_inflected_candidates() {
        let t = SchemeTable::builtin();
        let ex = ExceptionLexicon::default();
        let lex = Lexicon::parse("ol\n").unwrap();
        let r = Romanizer {
            table: &t,
            lexicon: &lex,
            exceptions: &ex,
            model: None,
            rescore: RescoreConfig::default(),
        };
        let got = r.romanize_str("الدى", None).unwrap();
        assert!(!got.is_empty());
        assert!(got.iter().all(|c| lex.accepts(&c.surface)), "{got:?}");
    }

    #[test]
    fn beam_widens_on_lexicon_miss() {
        let t = SchemeTable::builtin();
        let ex = ExceptionLexicon::default();
        let lex = Lexicon::parse("oldi\tfull\n").unwrap();
        let r = Romanizer {
            table: &t,
            lexicon: &lex,
            exceptions: &ex,
            model: None,
            rescore: RescoreConfig::default(),
        };
        let w = word("الدى", &t);
        assert!(!generate_candidates(&w, &t, &GenLimits::for_word(&w))
            .unwrap()
            .candidates
            .iter()
            .any(|c| c.surface == "oldi"));
        let got = r.romanize(&w, None).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].surface, "oldi");
    }

    #[test]
    fn ranking_without_model_follows_prior() {
        let t = SchemeTable::builtin();
        let lex = Lexicon::default();
        let ex = ExceptionLexicon::default();
        let r = Romanizer {
            table: &t,
            lexicon: &lex,
            exceptions: &ex,
            model: None,
            rescore: RescoreConfig::default(),
        };
        let got = r.romanize_str("عمله", None).unwrap();
        for pair in got.windows(2) {
            assert!(pair[0].total >= pair[1].total);
        }
    }
}
