//! Word n-gram language model with add-k smoothing and a character n-gram
//! model for out-of-vocabulary words.
//!
//! For a history `h` (the previous `n - 1` words, padded with `<s>`) and a
//! vocabulary `V` of observed words:
//!
//! ```text
//! P(w | h)   = (c(h, w) + k) / (c(h) + k (|V| + 1))   for w in V
//! P(UNK | h) = k / (c(h) + k (|V| + 1))
//! ```
//!
//! When `h` was never seen the longest seen suffix of `h` is used instead,
//! down to the empty history. An unknown word `w` scores
//! `P(UNK | h) · λ · P_char(w)`, where `P_char` is an add-k character model
//! over the training tokens with a word-end symbol.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::romanizer::Candidate;
use crate::text::tokenize;

pub const SENTENCE_START: &str = "<s>";
const WORD_START: &str = "<w>";
const WORD_END: &str = "</w>";
const FORMAT: &str = "otkit-ngram";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported model file (format {format:?}, version {version})")]
    UnsupportedFormat { format: String, version: u32 },
    #[error("malformed model file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub order: usize,
    pub char_order: usize,
    pub k: f64,
    pub lambda: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            order: 2,
            char_order: 3,
            k: 0.1,
            lambda: 0.5,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), LmError> {
        if self.order == 0 || self.char_order == 0 {
            return Err(LmError::InvalidConfig("orders must be at least 1".into()));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(LmError::InvalidConfig(format!(
                "k must be positive, got {}",
                self.k
            )));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(LmError::InvalidConfig(format!(
                "lambda must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Weight of the generation score against the LM score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescoreConfig {
    pub alpha: f64,
}

impl Default for RescoreConfig {
    fn default() -> Self {
        Self { alpha: 0.5 }
    }
}

impl RescoreConfig {
    pub fn new(alpha: f64) -> Result<Self, LmError> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(Self { alpha })
        } else {
            Err(LmError::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )))
        }
    }

    pub fn combine(&self, gen_score: f64, lm_score: f64) -> f64 {
        // Exact endpoints, so 0·(-inf) never turns into NaN.
        if self.alpha == 1.0 {
            gen_score
        } else if self.alpha == 0.0 {
            lm_score
        } else {
            self.alpha * gen_score + (1.0 - self.alpha) * lm_score
        }
    }
}

type Counts = BTreeMap<Vec<String>, BTreeMap<String, u64>>;

/// Add-k counts of every order from 1 to `order`, keyed by history.
#[derive(Debug, Clone, PartialEq)]
struct AddK {
    order: usize,
    k: f64,
    vocab: BTreeSet<String>,
    counts: Counts,
    totals: BTreeMap<Vec<String>, u64>,
}

impl AddK {
    fn from_counts(order: usize, k: f64, counts: Counts) -> Self {
        let vocab = counts
            .values()
            .flat_map(|next| next.keys().cloned())
            .collect();
        let totals = counts
            .iter()
            .map(|(h, next)| (h.clone(), next.values().sum()))
            .collect();
        Self {
            order,
            k,
            vocab,
            counts,
            totals,
        }
    }

    /// The longest suffix of `history` (at most `order - 1` long) seen in training.
    fn context<'h>(&self, history: &'h [String]) -> &'h [String] {
        let start = history.len().saturating_sub(self.order - 1);
        let mut h = &history[start..];
        while !h.is_empty() && !self.totals.contains_key(h) {
            h = &h[1..];
        }
        h
    }

    fn prob(&self, history: &[String], token: &str) -> f64 {
        let h = self.context(history);
        let total = self.totals.get(h).copied().unwrap_or(0) as f64;
        let count = self
            .counts
            .get(h)
            .and_then(|next| next.get(token))
            .copied()
            .unwrap_or(0) as f64;
        (count + self.k) / (total + self.k * (self.vocab.len() as f64 + 1.0))
    }

    fn unk_prob(&self, history: &[String]) -> f64 {
        let h = self.context(history);
        let total = self.totals.get(h).copied().unwrap_or(0) as f64;
        self.k / (total + self.k * (self.vocab.len() as f64 + 1.0))
    }
}

fn add_sequence(counts: &mut Counts, order: usize, start: &str, tokens: &[String]) {
    let padded: Vec<String> = std::iter::repeat_n(start.to_owned(), order - 1)
        .chain(tokens.iter().cloned())
        .collect();
    for pos in order - 1..padded.len() {
        for hlen in 0..order {
            let history = padded[pos - hlen..pos].to_vec();
            *counts
                .entry(history)
                .or_default()
                .entry(padded[pos].clone())
                .or_default() += 1;
        }
    }
}

fn merge(mut a: Counts, b: Counts) -> Counts {
    for (h, next) in b {
        let slot = a.entry(h).or_default();
        for (w, c) in next {
            *slot.entry(w).or_default() += c;
        }
    }
    a
}

fn char_tokens(word: &str) -> Vec<String> {
    word.chars()
        .map(String::from)
        .chain(std::iter::once(WORD_END.to_owned()))
        .collect()
}

/// A trained, immutable word n-gram model.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    words: AddK,
    chars: AddK,
    lambda: f64,
}

impl NgramModel {
    /// Trains on whitespace-tokenized lines; each line is one sentence.
    pub fn train<S: AsRef<str> + Sync>(
        corpus: &[S],
        config: &TrainConfig,
    ) -> Result<Self, LmError> {
        config.validate()?;
        let (words, chars) = corpus
            .par_iter()
            .fold(
                || (Counts::new(), Counts::new()),
                |(mut words, mut chars), line| {
                    let tokens = tokenize(line.as_ref());
                    if !tokens.is_empty() {
                        add_sequence(&mut words, config.order, SENTENCE_START, &tokens);
                        for t in &tokens {
                            add_sequence(
                                &mut chars,
                                config.char_order,
                                WORD_START,
                                &char_tokens(t),
                            );
                        }
                    }
                    (words, chars)
                },
            )
            .reduce(
                || (Counts::new(), Counts::new()),
                |(w1, c1), (w2, c2)| (merge(w1, w2), merge(c1, c2)),
            );
        if words.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        Ok(Self {
            words: AddK::from_counts(config.order, config.k, words),
            chars: AddK::from_counts(config.char_order, config.k, chars),
            lambda: config.lambda,
        })
    }

    pub fn order(&self) -> usize {
        self.words.order
    }

    pub fn char_order(&self) -> usize {
        self.chars.order
    }

    pub fn k(&self) -> f64 {
        self.words.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.words.vocab
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.vocab.contains(word)
    }

    /// Every history with stored counts, shortest first.
    pub fn histories(&self) -> impl Iterator<Item = &[String]> {
        self.words.counts.keys().map(Vec::as_slice)
    }

    /// Raw count of `word` after exactly `history`.
    pub fn count(&self, history: &[String], word: &str) -> u64 {
        self.words
            .counts
            .get(history)
            .and_then(|next| next.get(word))
            .copied()
            .unwrap_or(0)
    }

    /// P(word | history) for an in-vocabulary word, P(UNK | history) otherwise.
    pub fn prob(&self, history: &[String], word: &str) -> f64 {
        if self.contains(word) {
            self.words.prob(history, word)
        } else {
            self.words.unk_prob(history)
        }
    }

    pub fn unk_prob(&self, history: &[String]) -> f64 {
        self.words.unk_prob(history)
    }

    /// Natural-log probability of `word` under the character model,
    /// word end included.
    pub fn char_logprob(&self, word: &str) -> f64 {
        let tokens = char_tokens(word);
        let m = self.chars.order;
        let mut history: Vec<String> = vec![WORD_START.to_owned(); m - 1];
        let mut total = 0.0;
        for t in tokens {
            let p = if self.chars.vocab.contains(&t) {
                self.chars.prob(&history, &t)
            } else {
                self.chars.unk_prob(&history)
            };
            total += p.ln();
            history.push(t);
        }
        total
    }

    /// Natural-log probability of `word` following `history`.
    pub fn word_logprob(&self, history: &[String], word: &str) -> f64 {
        if self.contains(word) {
            self.words.prob(history, word).ln()
        } else {
            self.words.unk_prob(history).ln() + self.lambda.ln() + self.char_logprob(word)
        }
    }

    /// Natural-log probability of a sentence, starting from `<s>` padding.
    /// The empty sequence scores 0.
    pub fn score<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        self.score_after(&[], tokens)
    }

    /// Like [`score`](Self::score), continuing after the given context words.
    pub fn score_after<S: AsRef<str>>(&self, context: &[String], tokens: &[S]) -> f64 {
        let mut history: Vec<String> = vec![SENTENCE_START.to_owned(); self.order() - 1];
        history.extend(context.iter().cloned());
        let mut total = 0.0;
        for t in tokens {
            let t = t.as_ref();
            total += self.word_logprob(&history, t);
            history.push(t.to_owned());
        }
        total
    }

    /// exp(-mean log P) over all tokens; each line is scored as its own sentence.
    pub fn perplexity<S: AsRef<str>>(&self, corpus: &[S]) -> Result<f64, LmError> {
        let mut n = 0usize;
        let mut total = 0.0;
        for line in corpus {
            let tokens = tokenize(line.as_ref());
            n += tokens.len();
            total += self.score(&tokens);
        }
        if n == 0 {
            return Err(LmError::EmptyCorpus);
        }
        Ok((-total / n as f64).exp())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LmError> {
        serde_json::from_str::<ModelFile>(text)?.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<(), LmError> {
        std::fs::write(path, self.to_json()).map_err(|source| LmError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, LmError> {
        let text = std::fs::read_to_string(path).map_err(|source| LmError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Rescores candidates as isolated one-word sentences and sorts best first.
pub fn rescore(
    candidates: Vec<Candidate>,
    model: &NgramModel,
    config: &RescoreConfig,
) -> Vec<Candidate> {
    rescore_in_context(candidates, model, &[], config)
}

/// Rescores candidates as continuations of `context` and sorts best first,
/// breaking ties by surface.
pub fn rescore_in_context(
    mut candidates: Vec<Candidate>,
    model: &NgramModel,
    context: &[String],
    config: &RescoreConfig,
) -> Vec<Candidate> {
    for c in &mut candidates {
        c.lm_score = model.score_after(context, &tokenize(&c.surface));
        c.total = config.combine(c.gen_score, c.lm_score);
    }
    candidates.sort_by(|a, b| {
        b.total
            .total_cmp(&a.total)
            .then_with(|| a.surface.cmp(&b.surface))
    });
    candidates
}

#[derive(Serialize, Deserialize)]
struct HistoryCounts {
    history: Vec<String>,
    next: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    order: usize,
    counts: Vec<HistoryCounts>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    k: f64,
    lambda: f64,
    words: TableFile,
    chars: TableFile,
}

impl From<&AddK> for TableFile {
    fn from(t: &AddK) -> Self {
        Self {
            order: t.order,
            counts: t
                .counts
                .iter()
                .map(|(h, next)| HistoryCounts {
                    history: h.clone(),
                    next: next.clone(),
                })
                .collect(),
        }
    }
}

impl From<&NgramModel> for ModelFile {
    fn from(m: &NgramModel) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            k: m.words.k,
            lambda: m.lambda,
            words: (&m.words).into(),
            chars: (&m.chars).into(),
        }
    }
}

impl TryFrom<ModelFile> for NgramModel {
    type Error = LmError;

    fn try_from(f: ModelFile) -> Result<Self, LmError> {
        if f.format != FORMAT || f.version != VERSION {
            return Err(LmError::UnsupportedFormat {
                format: f.format,
                version: f.version,
            });
        }
        TrainConfig {
            order: f.words.order,
            char_order: f.chars.order,
            k: f.k,
            lambda: f.lambda,
        }
        .validate()?;
        let table = |t: TableFile| -> Result<AddK, LmError> {
            let mut counts = Counts::new();
            for hc in t.counts {
                if hc.history.len() >= t.order || hc.next.values().any(|&c| c == 0) {
                    return Err(LmError::InvalidConfig(
                        "count table inconsistent with its order".into(),
                    ));
                }
                counts.insert(hc.history, hc.next);
            }
            Ok(AddK::from_counts(t.order, f.k, counts))
        };
        let words = table(f.words)?;
        if !words.totals.contains_key(&Vec::new()) {
            return Err(LmError::EmptyCorpus);
        }
        Ok(Self {
            words,
            chars: table(f.chars)?,
            lambda: f.lambda,
        })
    }
}
