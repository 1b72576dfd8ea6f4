//! Character and word error rates.
//!
//! Both rates are `(S + I + D) / N` over a minimal unit-cost alignment, where
//! `N` is the reference length. Characters are extended grapheme clusters of
//! the NFC text, whitespace included; words are whitespace tokens. Corpus
//! figures pool edits and reference lengths over every line before dividing.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::text::tokenize;
use crate::text_direction::{segment_line, GraphemeLine};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("line count mismatch: reference has {reference}, hypothesis has {hypothesis}")]
    LineCountMismatch { reference: usize, hypothesis: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EditOp<T> {
    Match(T),
    Substitute { from: T, to: T },
    Delete(T),
    Insert(T),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EditCounts {
    pub matches: usize,
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
}

impl EditCounts {
    pub fn distance(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    pub fn reference_len(&self) -> usize {
        self.matches + self.substitutions + self.deletions
    }

    pub fn hypothesis_len(&self) -> usize {
        self.matches + self.substitutions + self.insertions
    }

    pub fn tally(&self) -> ErrorTally {
        ErrorTally {
            edits: self.distance(),
            reference_len: self.reference_len(),
        }
    }
}

impl std::ops::Add for EditCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            matches: self.matches + o.matches,
            substitutions: self.substitutions + o.substitutions,
            deletions: self.deletions + o.deletions,
            insertions: self.insertions + o.insertions,
        }
    }
}

impl std::ops::AddAssign for EditCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for EditCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// Pooled edits over a pooled reference length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorTally {
    pub edits: usize,
    pub reference_len: usize,
}

impl ErrorTally {
    /// `None` when the reference is empty.
    pub fn rate(&self) -> Option<f64> {
        (self.reference_len > 0).then(|| self.edits as f64 / self.reference_len as f64)
    }
}

impl std::ops::Add for ErrorTally {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            edits: self.edits + o.edits,
            reference_len: self.reference_len + o.reference_len,
        }
    }
}

impl std::iter::Sum for ErrorTally {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment<T = String> {
    ops: Vec<EditOp<T>>,
    counts: EditCounts,
}

impl<T: Clone> Alignment<T> {
    pub fn ops(&self) -> &[EditOp<T>] {
        &self.ops
    }

    pub fn counts(&self) -> EditCounts {
        self.counts
    }

    pub fn distance(&self) -> usize {
        self.counts.distance()
    }

    /// Applies the ops to `reference`; `None` if they do not describe it.
    pub fn replay(&self, reference: &[T]) -> Option<Vec<T>>
    where
        T: PartialEq,
    {
        let mut src = reference.iter();
        let mut out = Vec::with_capacity(self.counts.hypothesis_len());
        for op in &self.ops {
            match op {
                EditOp::Match(t) => {
                    (src.next()? == t).then_some(())?;
                    out.push(t.clone());
                }
                EditOp::Substitute { from, to } => {
                    (src.next()? == from).then_some(())?;
                    out.push(to.clone());
                }
                EditOp::Delete(t) => (src.next()? == t).then_some(())?,
                EditOp::Insert(t) => out.push(t.clone()),
            }
        }
        src.next().is_none().then_some(out)
    }
}

/// Minimal unit-cost alignment of two sequences.
///
/// The traceback runs from the end and prefers, among optimal moves,
/// match, then substitution, then deletion, then insertion.
pub fn align<T: PartialEq + Clone>(reference: &[T], hypothesis: &[T]) -> Alignment<T> {
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for (j, cell) in d.iter_mut().take(w).enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        d[i * w] = i;
        for j in 1..=m {
            let diag = d[(i - 1) * w + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            d[i * w + j] = diag.min(d[(i - 1) * w + j] + 1).min(d[i * w + j - 1] + 1);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let mut counts = EditCounts::default();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 && reference[i - 1] == hypothesis[j - 1] && d[(i - 1) * w + j - 1] == here
        {
            ops.push(EditOp::Match(reference[i - 1].clone()));
            counts.matches += 1;
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && d[(i - 1) * w + j - 1] + 1 == here {
            ops.push(EditOp::Substitute {
                from: reference[i - 1].clone(),
                to: hypothesis[j - 1].clone(),
            });
            counts.substitutions += 1;
            i -= 1;
            j -= 1;
        } else if i > 0 && d[(i - 1) * w + j] + 1 == here {
            ops.push(EditOp::Delete(reference[i - 1].clone()));
            counts.deletions += 1;
            i -= 1;
        } else {
            ops.push(EditOp::Insert(hypothesis[j - 1].clone()));
            counts.insertions += 1;
            j -= 1;
        }
    }
    ops.reverse();
    Alignment { ops, counts }
}

pub fn levenshtein_align(reference: &GraphemeLine, hypothesis: &GraphemeLine) -> Alignment<String> {
    align(reference.graphemes(), hypothesis.graphemes())
}

/// Edit distance only, in two rows of memory.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(x != y))
                .min(prev[j + 1] + 1)
                .min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn char_counts(reference: &str, hypothesis: &str) -> EditCounts {
    levenshtein_align(&segment_line(reference), &segment_line(hypothesis)).counts()
}

pub fn word_counts(reference: &str, hypothesis: &str) -> EditCounts {
    align(&tokenize(reference), &tokenize(hypothesis)).counts()
}

pub fn cer(reference: &str, hypothesis: &str) -> Result<f64, EvalError> {
    char_counts(reference, hypothesis)
        .tally()
        .rate()
        .ok_or(EvalError::EmptyReference)
}

pub fn wer(reference: &str, hypothesis: &str) -> Result<f64, EvalError> {
    word_counts(reference, hypothesis)
        .tally()
        .rate()
        .ok_or(EvalError::EmptyReference)
}

/// Publication metadata shown in report rows.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DocMeta {
    pub name: String,
    #[serde(default)]
    pub subject: String,
    #[serde(default)]
    pub date: String,
}

impl DocMeta {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentPair {
    pub meta: DocMeta,
    pub reference: Vec<String>,
    pub hypothesis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentRow {
    pub meta: DocMeta,
    /// Set when the document could not be scored; it is then left out of the totals.
    pub error: Option<EvalError>,
    pub chars: ErrorTally,
    pub words: ErrorTally,
}

impl DocumentRow {
    pub fn cer(&self) -> Option<f64> {
        self.error.is_none().then(|| self.chars.rate()).flatten()
    }

    pub fn wer(&self) -> Option<f64> {
        self.error.is_none().then(|| self.words.rate()).flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<DocumentRow>,
    pub chars: ErrorTally,
    pub words: ErrorTally,
}

fn score_document(doc: &DocumentPair) -> DocumentRow {
    if doc.reference.len() != doc.hypothesis.len() {
        return DocumentRow {
            meta: doc.meta.clone(),
            error: Some(EvalError::LineCountMismatch {
                reference: doc.reference.len(),
                hypothesis: doc.hypothesis.len(),
            }),
            chars: ErrorTally::default(),
            words: ErrorTally::default(),
        };
    }
    let pairs = doc.reference.iter().zip(&doc.hypothesis);
    DocumentRow {
        meta: doc.meta.clone(),
        error: None,
        chars: pairs.clone().map(|(r, h)| char_counts(r, h).tally()).sum(),
        words: pairs.map(|(r, h)| word_counts(r, h).tally()).sum(),
    }
}

/// Scores every document, in parallel, and pools the totals.
pub fn corpus_report(docs: &[DocumentPair]) -> EvalReport {
    let rows: Vec<DocumentRow> = docs.par_iter().map(score_document).collect();
    let scored = || rows.iter().filter(|r| r.error.is_none());
    EvalReport {
        chars: scored().map(|r| r.chars).sum(),
        words: scored().map(|r| r.words).sum(),
        rows,
    }
}

fn percent(rate: Option<f64>) -> String {
    rate.map_or_else(|| "n/a".to_owned(), |r| format!("{:.2}%", r * 100.0))
}

fn ratio(rate: Option<f64>) -> String {
    rate.map_or_else(String::new, |r| format!("{r:.6}"))
}

impl EvalReport {
    pub fn cer(&self) -> Option<f64> {
        self.chars.rate()
    }

    pub fn wer(&self) -> Option<f64> {
        self.words.rate()
    }

    /// An aligned plain-text table, one row per document and a total row.
    pub fn render_table(&self) -> String {
        let header = ["Name", "Subject", "Date", "CER", "WER"].map(String::from);
        let mut rows = vec![header];
        for r in &self.rows {
            let (c, w) = match &r.error {
                Some(EvalError::LineCountMismatch {
                    reference,
                    hypothesis,
                }) => (
                    format!("line mismatch {reference}/{hypothesis}"),
                    "n/a".to_owned(),
                ),
                Some(e) => (e.to_string(), "n/a".to_owned()),
                None => (percent(r.chars.rate()), percent(r.words.rate())),
            };
            rows.push([
                r.meta.name.clone(),
                r.meta.subject.clone(),
                r.meta.date.clone(),
                c,
                w,
            ]);
        }
        rows.push([
            "Total".into(),
            String::new(),
            String::new(),
            percent(self.cer()),
            percent(self.wer()),
        ]);

        let width = |s: &str| s.graphemes(true).count();
        let mut widths = [0usize; 5];
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(width(cell));
            }
        }
        let mut out = String::new();
        for (idx, row) in rows.iter().enumerate() {
            if idx == rows.len() - 1 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                writeln!(out, "{}", rule.join("  ")).unwrap();
            }
            let cells: Vec<String> = row
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(col, (cell, w))| {
                    let pad = " ".repeat(w - width(cell));
                    if col >= 3 {
                        format!("{pad}{cell}")
                    } else {
                        format!("{cell}{pad}")
                    }
                })
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        out
    }

    /// `name,subject,date,cer,wer` with rates as ratios; unscored documents
    /// have empty rate fields and the last row is the pooled total.
    pub fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "subject", "date", "cer", "wer"])
            .unwrap();
        for r in &self.rows {
            w.write_record([
                &r.meta.name,
                &r.meta.subject,
                &r.meta.date,
                &ratio(r.cer()),
                &ratio(r.wer()),
            ])
            .unwrap();
        }
        w.write_record(["TOTAL", "", "", &ratio(self.cer()), &ratio(self.wer())])
            .unwrap();
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("UTF-8 input")
    }
}
