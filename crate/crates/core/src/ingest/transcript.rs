//! Plain-text transcripts and their pairing with page lines.
//!
//! A transcript holds one line of text per `TextLine`, in reading order, with
//! a blank line between regions and LF line endings.

use std::path::{Path, PathBuf};

use super::page::{PageDocument, Points};
use super::IngestError;
use crate::text::nfc;
use crate::text_direction::{reverse_line, ReversalOptions};

/// How transcribed text is treated on its way into the ground truth.
///
/// Text is always NFC-normalized. With `preserve_errors` (the default)
/// nothing else changes, typos included; otherwise runs of whitespace are
/// collapsed and the line is trimmed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundTruthPolicy {
    pub preserve_errors: bool,
}

impl Default for GroundTruthPolicy {
    fn default() -> Self {
        Self {
            preserve_errors: true,
        }
    }
}

impl GroundTruthPolicy {
    pub fn apply(&self, text: &str) -> String {
        let text = nfc(text);
        if self.preserve_errors {
            text
        } else {
            text.split_whitespace().collect::<Vec<_>>().join(" ")
        }
    }
}

/// One page line with the ground truth assigned to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedLine {
    pub region_id: String,
    pub line_id: String,
    pub baseline: Option<Points>,
    pub text: String,
}

/// Splits a transcript into regions of non-blank lines.
pub fn split_transcript(text: &str) -> Vec<Vec<String>> {
    let mut regions = Vec::new();
    let mut current = Vec::new();
    for line in text.lines() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            if !current.is_empty() {
                regions.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line.to_owned());
        }
    }
    if !current.is_empty() {
        regions.push(current);
    }
    regions
}

/// The transcript's lines in order, region breaks dropped.
pub fn transcript_lines(text: &str) -> Vec<String> {
    split_transcript(text).into_iter().flatten().collect()
}

/// Joins regions with blank lines; the result ends with a newline unless empty.
pub fn render_transcript<S: AsRef<str>>(regions: &[Vec<S>]) -> String {
    let mut out = String::new();
    for (i, region) in regions.iter().filter(|r| !r.is_empty()).enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for line in region {
            out.push_str(line.as_ref());
            out.push('\n');
        }
    }
    out
}

pub fn read_transcript(path: &Path) -> Result<Vec<Vec<String>>, IngestError> {
    std::fs::read_to_string(path)
        .map(|t| split_transcript(&t))
        .map_err(|source| IngestError::io(path, source))
}

/// Assigns transcript lines to the page's lines in reading order.
pub fn pair_ground_truth<S: AsRef<str>>(
    doc: &PageDocument,
    transcript: &[S],
    policy: &GroundTruthPolicy,
) -> Result<Vec<PairedLine>, IngestError> {
    if doc.line_count() != transcript.len() {
        return Err(IngestError::LineCountMismatch {
            document: doc.line_count(),
            transcript: transcript.len(),
        });
    }
    let page_lines = doc
        .regions
        .iter()
        .flat_map(|r| r.lines.iter().map(move |l| (r, l)));
    Ok(page_lines
        .zip(transcript)
        .map(|((region, line), text)| PairedLine {
            region_id: region.id.clone(),
            line_id: line.id.clone(),
            baseline: line.baseline.clone(),
            text: policy.apply(text.as_ref()),
        })
        .collect())
}

/// Groups paired lines back into regions, keeping order.
pub fn group_by_region(pairs: &[PairedLine]) -> Vec<Vec<&str>> {
    let mut regions: Vec<Vec<&str>> = Vec::new();
    let mut last: Option<&str> = None;
    for p in pairs {
        if last != Some(p.region_id.as_str()) {
            regions.push(Vec::new());
            last = Some(&p.region_id);
        }
        regions.last_mut().unwrap().push(&p.text);
    }
    regions
}

/// The transcript text for one page, each line reversed if asked.
pub fn render_pairs(pairs: &[PairedLine], reverse: bool) -> String {
    let opts = ReversalOptions::default();
    let regions: Vec<Vec<String>> = group_by_region(pairs)
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|t| {
                    if reverse {
                        reverse_line(t, &opts)
                    } else {
                        t.to_owned()
                    }
                })
                .collect()
        })
        .collect();
    render_transcript(&regions)
}

/// A copy of `doc` with each line's text replaced by its paired text.
pub fn fill_page_text(doc: &PageDocument, pairs: &[PairedLine], reverse: bool) -> PageDocument {
    let opts = ReversalOptions::default();
    let mut out = doc.clone();
    let lines = out.regions.iter_mut().flat_map(|r| r.lines.iter_mut());
    for (line, pair) in lines.zip(pairs) {
        line.text = if reverse {
            reverse_line(&pair.text, &opts)
        } else {
            pair.text.clone()
        };
    }
    out
}

/// Writes one `<name>.txt` transcript per page into `out_dir` and returns
/// the paths in input order.
pub fn export_training_pairs<N: AsRef<str>>(
    pages: &[(N, Vec<PairedLine>)],
    out_dir: &Path,
    reverse: bool,
) -> Result<Vec<PathBuf>, IngestError> {
    std::fs::create_dir_all(out_dir).map_err(|e| IngestError::io(out_dir, e))?;
    pages
        .iter()
        .map(|(name, pairs)| {
            let path = out_dir.join(format!("{}.txt", name.as_ref()));
            std::fs::write(&path, render_pairs(pairs, reverse))
                .map_err(|e| IngestError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::page::{TextLine, TextRegion};

    fn doc(shape: &[usize]) -> PageDocument {
        let regions = shape
            .iter()
            .enumerate()
            .map(|(r, &n)| TextRegion {
                id: format!("r{r}"),
                coords: None,
                lines: (0..n)
                    .map(|l| TextLine {
                        id: format!("r{r}l{l}"),
                        ..TextLine::default()
                    })
                    .collect(),
            })
            .collect();
        PageDocument {
            regions,
            ..PageDocument::default()
        }
    }

    #[test]
    fn transcript_regions() {
        let regions = split_transcript("a\nb\n\n\nc\r\n");
        assert_eq!(regions, vec![vec!["a", "b"], vec!["c"]]);
        assert_eq!(render_transcript(&regions), "a\nb\n\nc\n");
        assert!(split_transcript("\n\n").is_empty());
        assert_eq!(render_transcript::<String>(&[]), "");
    }

    #[test]
    fn pairing_counts() {
        let d = doc(&[3, 3]);
        let lines: Vec<String> = (0..6).map(|i| format!("line {i}")).collect();
        let pairs = pair_ground_truth(&d, &lines, &GroundTruthPolicy::default()).unwrap();
        assert_eq!(pairs.len(), 6);
        assert_eq!(pairs[3].line_id, "r1l0");
        assert_eq!(pairs[3].region_id, "r1");
        assert!(matches!(
            pair_ground_truth(&d, &lines[..5], &GroundTruthPolicy::default()),
            Err(IngestError::LineCountMismatch {
                document: 6,
                transcript: 5
            })
        ));
    }

    #[test]
    fn typos_survive() {
        let d = doc(&[1]);
        let typo = ["ve  bu kitabın sahhifesi "];
        let pairs = pair_ground_truth(&d, &typo, &GroundTruthPolicy::default()).unwrap();
        assert_eq!(pairs[0].text, typo[0]);
        let tidy = pair_ground_truth(
            &d,
            &typo,
            &GroundTruthPolicy {
                preserve_errors: false,
            },
        )
        .unwrap();
        assert_eq!(tidy[0].text, "ve bu kitabın sahhifesi");
    }

    #[test]
    fn policy_normalizes() {
        assert_eq!(GroundTruthPolicy::default().apply("n\u{303}"), "ñ");
    }

    #[test]
    fn export_reverses() {
        let d = doc(&[1, 1]);
        let pairs =
            pair_ground_truth(&d, &["gavuruñ", "sayfa 12"], &GroundTruthPolicy::default()).unwrap();
        assert_eq!(render_pairs(&pairs, true), "ñuruvag\n\n12 afyas\n");
        assert_eq!(render_pairs(&pairs, false), "gavuruñ\n\nsayfa 12\n");

        let dir = tempfile::tempdir().unwrap();
        let paths = export_training_pairs(&[("p1", pairs.clone())], dir.path(), true).unwrap();
        let back = read_transcript(&paths[0]).unwrap();
        let again: Vec<Vec<String>> = back
            .iter()
            .map(|r| {
                r.iter()
                    .map(|l| reverse_line(l, &ReversalOptions::default()))
                    .collect()
            })
            .collect();
        assert_eq!(render_transcript(&again), "gavuruñ\n\nsayfa 12\n");

        let filled = fill_page_text(&d, &pairs, true);
        assert_eq!(filled.regions[0].lines[0].text, "ñuruvag");
    }
}
