//! Substitution plus bounded epenthesis, explored with a beam.
//!
//! Every Ottoman letter is replaced by one of its table alternatives. Between
//! two consonant realizations, and after a final consonant, one Modern Turkish
//! vowel may be inserted, since short vowels are usually left unwritten.
//!
//! The generation prior multiplies a weight of `1 / (rank + 1)` for each
//! chosen alternative with [`INSERTION_PENALTY`] per inserted vowel. Scores
//! are kept as natural logarithms.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::morphology::vowel_features;
use super::{Candidate, GenLimits, Origin, OtWord, RomanizeError, TraceStep};
use crate::scheme::SchemeTable;

pub const INSERTION_PENALTY: f64 = 0.5;

/// Candidates plus a note of whether any pruning happened.
#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub candidates: Vec<Candidate>,
    /// Some partial hypotheses fell off the beam.
    pub beam_truncated: bool,
    /// More distinct surfaces existed than `max_candidates`.
    pub limit_truncated: bool,
}

#[derive(Debug, Clone)]
struct Partial {
    surface: String,
    trace: Vec<TraceStep>,
    log_prior: f64,
    insertions: usize,
    ends_in_consonant: bool,
}

fn is_consonant(grapheme: &str) -> bool {
    grapheme
        .chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() && vowel_features(c).is_none())
}

fn rank_weight(rank: usize) -> f64 {
    -((rank + 1) as f64).ln()
}

fn by_prior(a: &Partial, b: &Partial) -> Ordering {
    b.log_prior
        .total_cmp(&a.log_prior)
        .then_with(|| a.surface.cmp(&b.surface))
        .then_with(|| a.insertions.cmp(&b.insertions))
        .then_with(|| a.ends_in_consonant.cmp(&b.ends_in_consonant))
}

/// Sorts, merges hypotheses with identical futures and keeps the best `beam`.
/// Returns true if anything beyond duplicates was dropped.
fn prune(partials: &mut Vec<Partial>, beam: usize) -> bool {
    partials.sort_by(by_prior);
    let mut seen = BTreeSet::new();
    partials.retain(|p| seen.insert((p.surface.clone(), p.insertions, p.ends_in_consonant)));
    let truncated = partials.len() > beam;
    partials.truncate(beam);
    truncated
}

pub fn generate_candidates(
    word: &OtWord,
    table: &SchemeTable,
    limits: &GenLimits,
) -> Result<Generation, RomanizeError> {
    limits.validate()?;
    let letters = word.letters();
    let vowels = table.mt_vowels();
    let insertion_weight = INSERTION_PENALTY.ln();

    let mut beam = vec![Partial {
        surface: String::new(),
        trace: Vec::new(),
        log_prior: 0.0,
        insertions: 0,
        ends_in_consonant: false,
    }];
    let mut beam_truncated = false;

    for (pos, &letter) in letters.iter().enumerate() {
        let positional = pos == 0 && table.has_word_initial_row(letter);
        let alternatives = if pos == 0 {
            table.word_initial_candidates(letter)?
        } else {
            table.ot_letter_candidates(letter)?
        };
        // A silent word-initial letter only carries a following vowel sign.
        let next_is_vowel_sign = letters
            .get(pos + 1)
            .is_some_and(|c| table.vowel_letters().contains(c));

        let mut next = Vec::with_capacity(beam.len() * alternatives.len());
        for partial in &beam {
            for (rank, alt) in alternatives.iter().enumerate() {
                if alt.is_empty() && positional && !next_is_vowel_sign {
                    continue;
                }
                let consonant = is_consonant(alt);
                let prior = partial.log_prior + rank_weight(rank);
                let step = TraceStep::Letter {
                    letter,
                    realization: alt.clone(),
                };
                let ends_in_consonant = if alt.is_empty() {
                    partial.ends_in_consonant
                } else {
                    consonant
                };

                let mut plain = partial.clone();
                plain.surface.push_str(alt);
                plain.trace.push(step.clone());
                plain.log_prior = prior;
                plain.ends_in_consonant = ends_in_consonant;
                next.push(plain);

                if consonant
                    && partial.ends_in_consonant
                    && partial.insertions < limits.max_insertions
                {
                    for &v in vowels {
                        let mut with = partial.clone();
                        with.surface.push(v);
                        with.surface.push_str(alt);
                        with.trace.push(TraceStep::Inserted(v));
                        with.trace.push(step.clone());
                        with.log_prior = prior + insertion_weight;
                        with.insertions += 1;
                        with.ends_in_consonant = true;
                        next.push(with);
                    }
                }
            }
        }
        beam_truncated |= prune(&mut next, limits.beam);
        beam = next;
    }

    let mut finals = Vec::with_capacity(beam.len() * (vowels.len() + 1));
    for partial in beam {
        if partial.ends_in_consonant && partial.insertions < limits.max_insertions {
            for &v in vowels {
                let mut with = partial.clone();
                with.surface.push(v);
                with.trace.push(TraceStep::Inserted(v));
                with.log_prior += insertion_weight;
                with.insertions += 1;
                with.ends_in_consonant = false;
                finals.push(with);
            }
        }
        finals.push(partial);
    }
    beam_truncated |= prune(&mut finals, limits.beam);

    let mut seen = BTreeSet::new();
    finals.retain(|p| seen.insert(p.surface.clone()));
    let limit_truncated = finals.len() > limits.max_candidates;
    finals.truncate(limits.max_candidates);

    let candidates = finals
        .into_iter()
        .map(|p| Candidate {
            surface: p.surface,
            trace: p.trace,
            gen_score: p.log_prior,
            lm_score: 0.0,
            total: p.log_prior,
            origin: Origin::Generated,
        })
        .collect();

    Ok(Generation {
        candidates,
        beam_truncated,
        limit_truncated,
    })
}
