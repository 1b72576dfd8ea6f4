//! Corpus manifests and reproducible train/validation/test splits.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::eval::DocMeta;
use crate::scheme::SchemeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// PAGE-XML file, relative to the manifest's directory unless absolute.
    pub page: PathBuf,
    pub transcript: PathBuf,
    pub scheme: SchemeId,
    #[serde(flatten)]
    pub meta: DocMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Directory that relative entry paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl CorpusManifest {
    /// Parses a manifest and checks that every referenced file exists.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, IngestError> {
        let mut m: Self = serde_json::from_str(text)?;
        m.base_dir = base_dir.to_path_buf();
        for e in &m.entries {
            for p in [m.resolve(&e.page), m.resolve(&e.transcript)] {
                if !p.is_file() {
                    return Err(IngestError::MissingFile(p));
                }
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new("")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), IngestError> {
        std::fs::write(path, self.to_json()).map_err(|e| IngestError::io(path, e))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn count(&self, split: Split) -> usize {
        self.entries
            .iter()
            .filter(|e| e.split == Some(split))
            .count()
    }
}

/// Target proportions for train, validation and test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self, IngestError> {
        let all = [train, val, test];
        if all.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(IngestError::InvalidRatios(format!(
                "ratios must be positive, got {all:?}"
            )));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(IngestError::InvalidRatios(format!(
                "ratios must sum to 1, got {sum}"
            )));
        }
        Ok(Self { train, val, test })
    }

    /// Entry counts by largest remainder; ties go to the earlier split.
    pub fn counts(&self, n: usize) -> [usize; 3] {
        let exact = [self.train, self.val, self.test].map(|r| r * n as f64);
        let mut counts = exact.map(|x| x.floor() as usize);
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| {
            let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let missing = n - counts.iter().sum::<usize>();
        for &i in order.iter().cycle().take(missing) {
            counts[i] += 1;
        }
        counts
    }
}

impl std::str::FromStr for SplitRatios {
    type Err = IngestError;

    /// `"0.8,0.1,0.1"`.
    fn from_str(s: &str) -> Result<Self, IngestError> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| IngestError::InvalidRatios(format!("{s:?}: {e}")))?;
        match parts[..] {
            [a, b, c] => Self::new(a, b, c),
            _ => Err(IngestError::InvalidRatios(format!(
                "expected three ratios, got {s:?}"
            ))),
        }
    }
}

/// Assigns every entry a split. The result depends only on the entry order,
/// the ratios and the seed; entries keep their order.
pub fn split_corpus(
    manifest: &CorpusManifest,
    ratios: &SplitRatios,
    seed: u64,
) -> Result<CorpusManifest, IngestError> {
    let n = manifest.entries.len();
    if n == 0 {
        return Err(IngestError::EmptyManifest);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let counts = ratios.counts(n);
    let labels = Split::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&s, c)| std::iter::repeat_n(s, c));

    let mut out = manifest.clone();
    for (idx, label) in order.into_iter().zip(labels) {
        out.entries[idx].split = Some(label);
    }
    out.seed = Some(seed);
    Ok(out)
}
