//! Corpus toolkit for Ottoman Turkish handwritten-text-recognition ground truth.
//!
//! The crate covers the full preparation loop for Arabic-script Ottoman
//! Turkish pages transcribed into Latin-script Modern Turkish:
//!
//! - [`text_direction`]: grapheme-aware reversal of transcription lines so that
//!   left-to-right ground truth can be paired with right-to-left page images.
//! - [`scheme`]: the Ottoman-to-Latin correspondence table and conversion
//!   between the IA and loose transcription schemes.
//! - [`romanizer`]: candidate romanizations of Ottoman words with lexicon,
//!   affix and vowel-harmony filtering.
//! - [`lm`]: word n-gram language model with character-level backoff for
//!   rescoring candidates.
//! - [`eval`]: character and word error rates and corpus reports.
//! - [`ingest`]: PAGE-XML reading and writing, transcript pairing, training
//!   exports and corpus splits.

pub mod eval;
pub mod ingest;
pub mod lm;
pub mod romanizer;
pub mod scheme;
pub mod text;
pub mod text_direction;

pub use eval::{cer, corpus_report, levenshtein_align, wer, Alignment, EvalReport};
pub use ingest::{parse_page_xml, write_page_xml, PageDocument};
pub use lm::{NgramModel, RescoreConfig};
pub use romanizer::{Candidate, GenLimits, OtWord, Romanizer};
pub use scheme::{SchemeId, SchemeTable};
pub use text_direction::{
    reverse_document, reverse_line, segment_line, GraphemeLine, ReversalOptions,
};
