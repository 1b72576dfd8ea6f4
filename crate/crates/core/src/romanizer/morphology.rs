//! Suffix templates, affix stripping and Modern Turkish vowel harmony.
//!
//! Suffixes are written with archiphonemes: `A` is the two-fold vowel
//! (a/e), `I` the four-fold vowel (ı/i/u/ü) and `D` the dental that assimilates
//! in voicing (d/t). A parenthesised part is a buffer segment: a buffer vowel
//! surfaces only after a consonant, a buffer consonant only after a vowel.
//!
//! Vowel features used throughout:
//!
//! | vowel | back | rounded | high |
//! |-------|------|---------|------|
//! | a     | yes  | no      | no   |
//! | ı     | yes  | no      | yes  |
//! | o     | yes  | yes     | no   |
//! | u     | yes  | yes     | yes  |
//! | e     | no   | no      | no   |
//! | i     | no   | no      | yes  |
//! | ö     | no   | yes     | no   |
//! | ü     | no   | yes     | yes  |
//!
//! Circumflexed long vowels take the features of their base letter.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::text::turkish_lowercase;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MorphologyError {
    #[error("no vowel to harmonize with in {0:?}")]
    NoVowelInStem(String),
    #[error("invalid affix template {0:?}")]
    InvalidAffix(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VowelFeatures {
    pub back: bool,
    pub rounded: bool,
    pub high: bool,
}

/// Features of a Modern Turkish vowel, or `None` for anything else.
pub fn vowel_features(c: char) -> Option<VowelFeatures> {
    let (back, rounded, high) = match c {
        'a' | 'â' | 'A' | 'Â' => (true, false, false),
        'ı' | 'I' => (true, false, true),
        'o' | 'O' => (true, true, false),
        'u' | 'û' | 'U' | 'Û' => (true, true, true),
        'e' | 'E' => (false, false, false),
        'i' | 'î' | 'İ' | 'Î' => (false, false, true),
        'ö' | 'Ö' => (false, true, false),
        'ü' | 'Ü' => (false, true, true),
        _ => return None,
    };
    Some(VowelFeatures {
        back,
        rounded,
        high,
    })
}

pub fn is_vowel(c: char) -> bool {
    vowel_features(c).is_some()
}

fn is_voiceless(c: char) -> bool {
    matches!(c, 'ç' | 'f' | 'h' | 'k' | 'p' | 's' | 'ş' | 't')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Archiphoneme {
    A,
    I,
    D,
}

impl Archiphoneme {
    fn surfaces(self) -> &'static [char] {
        match self {
            Archiphoneme::A => &['a', 'e'],
            Archiphoneme::I => &['ı', 'i', 'u', 'ü'],
            Archiphoneme::D => &['d', 't'],
        }
    }

    fn is_vowel(self) -> bool {
        !matches!(self, Archiphoneme::D)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Segment {
    Fixed(char),
    Arch(Archiphoneme),
    Buffer(Vec<Segment>),
}

impl Segment {
    fn starts_with_vowel(&self) -> bool {
        match self {
            Segment::Fixed(c) => is_vowel(*c),
            Segment::Arch(a) => a.is_vowel(),
            Segment::Buffer(inner) => inner.first().is_some_and(Segment::starts_with_vowel),
        }
    }
}

/// A suffix in archiphoneme notation, e.g. `-DI` or `-(I)ncI`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffixTemplate {
    notation: String,
    segments: Vec<Segment>,
}

impl AffixTemplate {
    pub fn notation(&self) -> &str {
        &self.notation
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }
}

impl fmt::Display for AffixTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "-{}", self.notation)
    }
}

impl FromStr for AffixTemplate {
    type Err = MorphologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let notation = s.strip_prefix('-').unwrap_or(s);
        let invalid = || MorphologyError::InvalidAffix(s.to_owned());
        let mut segments = Vec::new();
        let mut buffer: Option<Vec<Segment>> = None;
        for c in notation.chars() {
            let seg = match c {
                '(' if buffer.is_none() => {
                    buffer = Some(Vec::new());
                    continue;
                }
                ')' => {
                    let inner = buffer
                        .take()
                        .filter(|b| !b.is_empty())
                        .ok_or_else(invalid)?;
                    segments.push(Segment::Buffer(inner));
                    continue;
                }
                'A' => Segment::Arch(Archiphoneme::A),
                'I' => Segment::Arch(Archiphoneme::I),
                'D' => Segment::Arch(Archiphoneme::D),
                c if c.is_lowercase() => Segment::Fixed(c),
                _ => return Err(invalid()),
            };
            match buffer.as_mut() {
                Some(b) => b.push(seg),
                None => segments.push(seg),
            }
        }
        if buffer.is_some() || segments.is_empty() {
            return Err(invalid());
        }
        Ok(Self {
            notation: notation.to_owned(),
            segments,
        })
    }
}

/// The starter inventory: past `-DI`, plural `-lAr`, ordinal `-(I)ncI`,
/// genitive `-In`, locative `-DA`, ablative `-DAn`.
pub fn starter_affixes() -> Vec<AffixTemplate> {
    ["DI", "lAr", "(I)ncI", "In", "DA", "DAn"]
        .iter()
        .map(|s| s.parse().expect("starter affixes are well formed"))
        .collect()
}

/// A stem plus the suffixes stripped from it, in surface order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segmentation {
    pub stem: String,
    pub chain: Vec<AffixTemplate>,
}

/// Every way of peeling suffixes off `surface` until a known word is left.
///
/// Suffixes are matched from the end of the word, longest realization first;
/// each archiphoneme accepts any of its surface forms, so character-accurate
/// but disharmonic readings (`oldi`) still segment. `is_known` decides which
/// remainders count as stems or listed full forms.
pub fn strip_affixes<F>(
    surface: &str,
    affixes: &[AffixTemplate],
    is_known: F,
) -> BTreeSet<Segmentation>
where
    F: Fn(&str) -> bool,
{
    let chars: Vec<char> = turkish_lowercase(surface).chars().collect();
    let mut found = BTreeSet::new();
    let mut chain = Vec::new();
    peel(&chars, affixes, &is_known, &mut chain, &mut found);
    found
}

fn peel<F: Fn(&str) -> bool>(
    word: &[char],
    affixes: &[AffixTemplate],
    is_known: &F,
    chain: &mut Vec<AffixTemplate>,
    found: &mut BTreeSet<Segmentation>,
) {
    if word.is_empty() {
        return;
    }
    let stem: String = word.iter().collect();
    if is_known(&stem) {
        let mut ordered = chain.clone();
        ordered.reverse();
        found.insert(Segmentation {
            stem,
            chain: ordered,
        });
    }
    for affix in affixes {
        let mut lengths = suffix_match_lengths(word, &affix.segments);
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths.dedup();
        for len in lengths {
            if len == 0 || len >= word.len() {
                continue;
            }
            chain.push(affix.clone());
            peel(&word[..word.len() - len], affixes, is_known, chain, found);
            chain.pop();
        }
    }
}

/// Lengths of the word-final substrings that realize `segments`.
fn suffix_match_lengths(word: &[char], segments: &[Segment]) -> Vec<usize> {
    let mut out = Vec::new();
    match_back(word, word.len(), segments, 0, &mut out);
    out
}

/// Matches `segments` right to left ending at `end`; `consumed` counts chars
/// already matched to the right.
fn match_back(
    word: &[char],
    end: usize,
    segments: &[Segment],
    consumed: usize,
    out: &mut Vec<usize>,
) {
    let Some((last, rest)) = segments.split_last() else {
        out.push(consumed);
        return;
    };
    match last {
        Segment::Fixed(c) => {
            if end > 0 && word[end - 1] == *c {
                match_back(word, end - 1, rest, consumed + 1, out);
            }
        }
        Segment::Arch(a) => {
            if end > 0 && a.surfaces().contains(&word[end - 1]) {
                match_back(word, end - 1, rest, consumed + 1, out);
            }
        }
        Segment::Buffer(inner) => {
            // Absent buffer.
            match_back(word, end, rest, consumed, out);
            // Present buffer: match inner, then continue with the rest.
            let mut inner_lengths = Vec::new();
            match_back(word, end, inner, 0, &mut inner_lengths);
            for l in inner_lengths {
                match_back(word, end - l, rest, consumed + l, out);
            }
        }
    }
}

/// Realizes `chain` on `stem` by vowel harmony and voicing assimilation.
pub fn apply_harmony(stem: &str, chain: &[AffixTemplate]) -> Result<String, MorphologyError> {
    let mut word = turkish_lowercase(stem);
    for affix in chain {
        for seg in &affix.segments {
            realize(&mut word, seg).map_err(|_| MorphologyError::NoVowelInStem(stem.to_owned()))?;
        }
    }
    Ok(word)
}

fn realize(word: &mut String, seg: &Segment) -> Result<(), MorphologyError> {
    match seg {
        Segment::Fixed(c) => word.push(*c),
        Segment::Arch(Archiphoneme::D) => {
            let voiceless = word.chars().last().is_some_and(is_voiceless);
            word.push(if voiceless { 't' } else { 'd' });
        }
        Segment::Arch(a) => {
            let last = word
                .chars()
                .rev()
                .find_map(vowel_features)
                .ok_or_else(|| MorphologyError::NoVowelInStem(word.clone()))?;
            let v = match (a, last.back, last.rounded) {
                (Archiphoneme::A, true, _) => 'a',
                (Archiphoneme::A, false, _) => 'e',
                (_, true, false) => 'ı',
                (_, true, true) => 'u',
                (_, false, false) => 'i',
                (_, false, true) => 'ü',
            };
            word.push(v);
        }
        Segment::Buffer(inner) => {
            let after_vowel = word.chars().last().is_some_and(is_vowel);
            let vowel_buffer = inner.first().is_some_and(Segment::starts_with_vowel);
            if vowel_buffer != after_vowel {
                for s in inner {
                    realize(word, s)?;
                }
            }
        }
    }
    Ok(())
}

/// Checks backness harmony between consecutive vowels, and rounding harmony
/// for high vowels.
pub fn check_vowel_harmony(word: &str) -> bool {
    let lowered = turkish_lowercase(word);
    let vowels: Vec<VowelFeatures> = lowered.chars().filter_map(vowel_features).collect();
    vowels.windows(2).all(|pair| {
        let (prev, cur) = (pair[0], pair[1]);
        prev.back == cur.back && (!cur.high || prev.rounded == cur.rounded)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> AffixTemplate {
        s.parse().unwrap()
    }

    #[test]
    fn parses_templates() {
        assert_eq!(
            t("-DI").segments(),
            [
                Segment::Arch(Archiphoneme::D),
                Segment::Arch(Archiphoneme::I)
            ]
        );
        assert_eq!(t("(I)ncI").segments().len(), 4);
        assert_eq!(t("-lAr").to_string(), "-lAr");
        assert!("-X".parse::<AffixTemplate>().is_err());
        assert!("(I".parse::<AffixTemplate>().is_err());
        assert!("-()".parse::<AffixTemplate>().is_err());
        assert!("".parse::<AffixTemplate>().is_err());
    }

    #[test]
    fn harmony_realizes_suffixes() {
        assert_eq!(apply_harmony("ol", &[t("DI")]).unwrap(), "oldu");
        assert_eq!(apply_harmony("gel", &[t("DI")]).unwrap(), "geldi");
        assert_eq!(apply_harmony("üç", &[t("(I)ncI")]).unwrap(), "üçüncü");
        assert_eq!(apply_harmony("iki", &[t("(I)ncI")]).unwrap(), "ikinci");
        assert_eq!(
            apply_harmony("gel", &[t("DI"), t("lAr")]).unwrap(),
            "geldiler"
        );
        assert_eq!(apply_harmony("kitap", &[t("DA")]).unwrap(), "kitapta");
        assert_eq!(apply_harmony("ev", &[t("DAn")]).unwrap(), "evden");
        assert_eq!(apply_harmony("kitâb", &[t("lAr")]).unwrap(), "kitâblar");
        assert_eq!(apply_harmony("gel", &[]).unwrap(), "gel");
    }

    #[test]
    fn harmony_needs_a_vowel() {
        assert_eq!(
            apply_harmony("rb", &[t("lAr")]),
            Err(MorphologyError::NoVowelInStem("rb".into()))
        );
        // A lone dental needs no vowel.
        assert_eq!(apply_harmony("st", &[t("D")]).unwrap(), "stt");
    }

    #[test]
    fn harmony_check() {
        assert!(check_vowel_harmony("oldu"));
        assert!(!check_vowel_harmony("oldi"));
        assert!(check_vowel_harmony("a"));
        assert!(check_vowel_harmony("üçüncü"));
        assert!(!check_vowel_harmony("üçünci"));
        assert!(check_vowel_harmony("geldiler"));
        assert!(check_vowel_harmony(""));
        assert!(check_vowel_harmony("KIZLAR"));
    }

    #[test]
    fn strips_affixes() {
        let affixes = vec![t("DI"), t("lAr")];
        let got = strip_affixes("geldiler", &affixes, |s| s == "gel");
        let want: BTreeSet<_> = [Segmentation {
            stem: "gel".into(),
            chain: vec![t("DI"), t("lAr")],
        }]
        .into();
        assert_eq!(got, want);

        let got = strip_affixes("gel", &affixes, |s| s == "gel");
        assert_eq!(got.into_iter().next().unwrap().chain, vec![]);

        assert!(strip_affixes("xyzzy", &affixes, |_| false).is_empty());
    }

    #[test]
    fn strips_disharmonic_character_accurate_forms() {
        let affixes = starter_affixes();
        let got = strip_affixes("oldi", &affixes, |s| s == "ol");
        assert_eq!(got.len(), 1);
        let got = strip_affixes("üçünci", &affixes, |s| s == "üç");
        assert_eq!(got.into_iter().next().unwrap().chain, vec![t("(I)ncI")]);
    }

    #[test]
    fn buffer_consonant_follows_vowels() {
        let acc = t("(y)I");
        assert_eq!(
            apply_harmony("kapı", std::slice::from_ref(&acc)).unwrap(),
            "kapıyı"
        );
        assert_eq!(
            apply_harmony("ev", std::slice::from_ref(&acc)).unwrap(),
            "evi"
        );
        let got = strip_affixes("kapıyı", &[acc], |s| s == "kapı");
        assert_eq!(got.len(), 1);
    }
}
