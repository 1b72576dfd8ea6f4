//! Reversal of transcription lines between LTR and RTL storage order.
//!
//! Latin-script transcriptions are typed left to right while the page images
//! they describe run right to left. Reversing each line lets the two be
//! paired line by line. The reversal unit is the extended grapheme cluster,
//! so a combining diacritic never leaves its base letter, and maximal runs of
//! decimal digits keep their internal order because numerals are written left
//! to right even inside right-to-left text.

use std::fmt;
use std::ops::Range;

use unicode_normalization::char::is_combining_mark;
use unicode_segmentation::UnicodeSegmentation;

use crate::text::nfc;

/// A line of text as a sequence of extended grapheme clusters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GraphemeLine {
    graphemes: Vec<String>,
    source_normalization: bool,
}

impl GraphemeLine {
    pub fn graphemes(&self) -> &[String] {
        &self.graphemes
    }

    pub fn len(&self) -> usize {
        self.graphemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphemes.is_empty()
    }

    /// True when the source string was NFC-normalized before segmentation.
    pub fn source_normalization(&self) -> bool {
        self.source_normalization
    }

    pub fn into_graphemes(self) -> Vec<String> {
        self.graphemes
    }
}

impl fmt::Display for GraphemeLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.graphemes {
            f.write_str(g)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunKind {
    Reversible,
    DigitRun,
}

/// A contiguous span of grapheme indices with a uniform reversal behaviour.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RunSegment {
    pub kind: RunKind,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReversalOptions {
    /// Swap paired brackets such as `(`/`)` after reversal.
    pub mirror_brackets: bool,
    /// Keep each maximal digit run in its original internal order.
    pub preserve_digit_runs: bool,
}

impl Default for ReversalOptions {
    fn default() -> Self {
        Self {
            mirror_brackets: false,
            preserve_digit_runs: true,
        }
    }
}

/// NFC-normalizes `text` and splits it into extended grapheme clusters.
pub fn segment_line(text: &str) -> GraphemeLine {
    let normalized = nfc(text);
    GraphemeLine {
        graphemes: normalized.graphemes(true).map(str::to_owned).collect(),
        source_normalization: true,
    }
}

/// ASCII `0-9` and Arabic-Indic `٠-٩`.
pub fn is_decimal_digit(c: char) -> bool {
    c.is_ascii_digit() || ('\u{0660}'..='\u{0669}').contains(&c)
}

fn is_digit_grapheme(g: &str) -> bool {
    g.chars().next().is_some_and(is_decimal_digit)
}

/// Splits a line into maximal digit runs and everything else.
pub fn segment_runs(line: &GraphemeLine) -> Vec<RunSegment> {
    let mut runs: Vec<RunSegment> = Vec::new();
    for (i, g) in line.graphemes.iter().enumerate() {
        let kind = if is_digit_grapheme(g) {
            RunKind::DigitRun
        } else {
            RunKind::Reversible
        };
        match runs.last_mut() {
            Some(last) if last.kind == kind => last.span.end = i + 1,
            _ => runs.push(RunSegment {
                kind,
                span: i..i + 1,
            }),
        }
    }
    runs
}

/// Reverses the grapheme order of `text`.
///
/// The output has the same number of grapheme clusters as the NFC form of the
/// input, and applying the function twice with the same options returns the
/// NFC form of the input.
pub fn reverse_line(text: &str, opts: &ReversalOptions) -> String {
    let line = segment_line(text);
    let clusters = line.graphemes();
    if clusters.is_empty() {
        return String::new();
    }

    // A line that opens with a bare combining mark has nothing for the mark to
    // sit on; it stays in front instead of latching onto a new base letter.
    let pinned = usize::from(is_orphan_cluster(&clusters[0]));
    let blocks = reversal_blocks(clusters, pinned, opts);

    let mut out: Vec<&str> = Vec::with_capacity(clusters.len());
    out.extend(clusters[..pinned].iter().map(String::as_str));
    for block in blocks.iter().rev() {
        out.extend(clusters[block.clone()].iter().map(String::as_str));
    }

    // Contexts the pairwise check cannot see (regional-indicator parity, for
    // one) can still regroup clusters; such lines are returned unreversed.
    let candidate: String = out.concat();
    let resegmented = candidate.graphemes(true).count() == clusters.len()
        && candidate
            .graphemes(true)
            .zip(out.iter())
            .all(|(a, b)| a == *b);
    if !resegmented {
        return line.to_string();
    }

    if opts.mirror_brackets {
        out.iter().map(|g| mirror_bracket(g)).collect()
    } else {
        candidate
    }
}

/// Element-wise [`reverse_line`]; line order is unchanged.
pub fn reverse_document<S: AsRef<str>>(lines: &[S], opts: &ReversalOptions) -> Vec<String> {
    lines
        .iter()
        .map(|l| reverse_line(l.as_ref(), opts))
        .collect()
}

/// Groups cluster indices `start..` into blocks that move as units.
///
/// Digit runs are single blocks when preserved, and a cluster made only of
/// combining marks rides with the block before it. Two neighbouring blocks are
/// fused whenever placing them in swapped order would make the grapheme
/// segmenter join them into one cluster.
fn reversal_blocks(clusters: &[String], start: usize, opts: &ReversalOptions) -> Vec<Range<usize>> {
    let mut blocks: Vec<Range<usize>> = Vec::new();
    let mut i = start;
    while i < clusters.len() {
        if is_orphan_cluster(&clusters[i]) && !blocks.is_empty() {
            // Only controls leave a mark unattached; keep the two together.
            blocks.last_mut().unwrap().end = i + 1;
            i += 1;
        } else if opts.preserve_digit_runs && is_digit_grapheme(&clusters[i]) {
            let mut end = i + 1;
            while end < clusters.len() && is_digit_grapheme(&clusters[end]) {
                end += 1;
            }
            blocks.push(i..end);
            i = end;
        } else {
            blocks.push(i..i + 1);
            i += 1;
        }
    }

    loop {
        let mut merged = false;
        let mut j = 0;
        while j + 1 < blocks.len() {
            let left = &clusters[blocks[j + 1].clone()];
            let right = &clusters[blocks[j].clone()];
            if joins(left, right) {
                blocks[j].end = blocks[j + 1].end;
                blocks.remove(j + 1);
                merged = true;
            } else {
                j += 1;
            }
        }
        if !merged {
            return blocks;
        }
    }
}

/// True when `left` followed by `right` does not segment back into the same
/// clusters.
fn joins(left: &[String], right: &[String]) -> bool {
    let joined: String = left.iter().chain(right).map(String::as_str).collect();
    let boundary: usize = left.iter().map(String::len).sum();
    let mut count = 0;
    let mut has_boundary = false;
    for (idx, _) in joined.grapheme_indices(true) {
        count += 1;
        has_boundary |= idx == boundary;
    }
    count != left.len() + right.len() || !has_boundary
}

/// A cluster that would extend whatever base precedes it.
fn is_orphan_cluster(cluster: &str) -> bool {
    match cluster.chars().next() {
        Some(c) if is_combining_mark(c) => true,
        Some(_) => {
            let probe = format!("a{cluster}");
            probe.graphemes(true).count() == 1
        }
        None => false,
    }
}

fn mirror_bracket(g: &str) -> &str {
    match g {
        "(" => ")",
        ")" => "(",
        "[" => "]",
        "]" => "[",
        "{" => "}",
        "}" => "{",
        "<" => ">",
        ">" => "<",
        "«" => "»",
        "»" => "«",
        "‹" => "›",
        "›" => "‹",
        other => other,
    }
}
