//! Page documents, transcripts, training exports and corpus splits.

mod manifest;
mod page;
mod transcript;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use manifest::{split_corpus, CorpusManifest, ManifestEntry, Split, SplitRatios};
pub use page::{
    parse_page_xml, parse_page_xml_with_warnings, write_page_xml, Metadata, PageDocument,
    ParseWarning, Point, Points, TextLine, TextRegion, PAGE_NAMESPACE,
};
pub use transcript::{
    export_training_pairs, fill_page_text, group_by_region, pair_ground_truth, read_transcript,
    render_pairs, render_transcript, split_transcript, transcript_lines, GroundTruthPolicy,
    PairedLine,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("unsupported schema: {0}")]
    UnsupportedSchema(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("line count mismatch: document has {document} lines, transcript has {transcript}")]
    LineCountMismatch { document: usize, transcript: usize },
    #[error("manifest has no entries")]
    EmptyManifest,
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("malformed manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
