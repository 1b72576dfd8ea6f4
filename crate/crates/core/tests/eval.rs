use std::collections::HashMap;

use otkit_core::eval::{align, cer, corpus_report, edit_distance, wer, DocMeta, DocumentPair};
use otkit_core::lm::{rescore_in_context, NgramModel, RescoreConfig, TrainConfig};
use otkit_core::romanizer::{Candidate, Origin};
use proptest::prelude::*;

/// Memoized recursion over suffix pairs, written independently of the DP.
fn oracle(a: &[u8], b: &[u8]) -> usize {
    fn go(
        a: &[u8],
        b: &[u8],
        i: usize,
        j: usize,
        memo: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let d = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j + 1, memo)
                .min(go(a, b, i + 1, j, memo))
                .min(go(a, b, i, j + 1, memo))
        };
        memo.insert((i, j), d);
        d
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

fn word() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..5, 0..=12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn distance_matches_oracle(a in word(), b in word()) {
        let al = align(&a, &b);
        prop_assert_eq!(al.distance(), oracle(&a, &b));
        prop_assert_eq!(edit_distance(&a, &b), al.distance());
        let c = al.counts();
        prop_assert_eq!(c.reference_len(), a.len());
        prop_assert_eq!(c.hypothesis_len(), b.len());
        prop_assert_eq!(al.replay(&a), Some(b.clone()));
    }

    #[test]
    fn distance_is_symmetric(a in word(), b in word()) {
        prop_assert_eq!(edit_distance(&a, &b), edit_distance(&b, &a));
    }

    #[test]
    fn triangle_inequality(a in word(), b in word(), c in word()) {
        prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
    }

    #[test]
    fn cer_is_zero_iff_identical(a in "[a-zçğıöşüâ ]{1,15}", b in "[a-zçğıöşüâ ]{0,15}") {
        let r = cer(&a, &b).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert_eq!(r == 0.0, a == b);
    }
}

#[test]
fn constructed_fixtures() {
    assert!((cer("abcdefghij", "abcdefghiX").unwrap() - 0.10).abs() < 1e-9);
    assert!((cer("abcd", "abed").unwrap() - 0.25).abs() < 1e-9);
    assert!((wer("a b c", "a x c").unwrap() - 1.0 / 3.0).abs() < 1e-9);
    assert_eq!(wer("a", "a b").unwrap(), 1.0);
}

#[test]
fn whitespace_counts_as_a_character() {
    assert!((cer("ab cd", "abcd").unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn report_table_shape() {
    let docs = [
        DocumentPair {
            meta: DocMeta {
                name: "Kadınlar Dünyası".into(),
                subject: "women".into(),
                date: "1914".into(),
            },
            reference: vec!["abcdefghij".into()],
            hypothesis: vec!["abcdefghij".into()],
        },
        DocumentPair {
            meta: DocMeta {
                name: "Ahali".into(),
                subject: "politics".into(),
                date: "1910".into(),
            },
            reference: vec!["abcdefghij".into()],
            hypothesis: vec!["XbcdefghiX".into()],
        },
    ];
    let report = corpus_report(&docs);
    let table = report.render_table();
    let lines: Vec<&str> = table.lines().collect();
    assert!(lines[0].starts_with("Name"));
    assert!(lines[1].contains("0.00%"));
    assert!(lines[2].contains("20.00%"));
    assert!(lines.last().unwrap().starts_with("Total") && lines.last().unwrap().contains("10.00%"));
    // Columns line up across rows.
    let col = |l: &str| l.find('%').map(|i| l[..i].chars().count());
    assert_eq!(col(lines[1]), col(lines[2]));
}

fn cand(surface: &str, gen: f64) -> Candidate {
    Candidate {
        surface: surface.into(),
        trace: vec![],
        gen_score: gen,
        lm_score: 0.0,
        total: gen,
        origin: Origin::Generated,
    }
}

#[test]
fn rescoring_does_not_hurt_cer() {
    let model = NgramModel::train(
        &[
            "bu amele geldi",
            "amele ile hoca geldi",
            "bu kitap güzel",
            "hoca bu kitabı okudu",
        ],
        &TrainConfig::default(),
    )
    .unwrap();
    // (reference word, candidates in generation order)
    let slots = [
        ("amele", vec![cand("imle", -1.0), cand("amele", -1.4)]),
        ("geldi", vec![cand("geldi", -0.5), cand("kildi", -0.9)]),
        ("kitap", vec![cand("ketab", -0.3), cand("kitap", -0.6)]),
        ("hoca", vec![cand("havace", -0.2), cand("hoca", -2.0)]),
    ];
    let mut history: Vec<String> = Vec::new();
    let (mut without, mut with) = (String::new(), String::new());
    let mut reference = String::new();
    for (r, cands) in &slots {
        without.push_str(&cands[0].surface);
        let best =
            &rescore_in_context(cands.clone(), &model, &history, &RescoreConfig::default())[0];
        with.push_str(&best.surface);
        reference.push_str(r);
        history.push(best.surface.clone());
        for s in [&mut without, &mut with, &mut reference] {
            s.push(' ');
        }
    }
    let (a, b) = (
        cer(&reference, &without).unwrap(),
        cer(&reference, &with).unwrap(),
    );
    assert!(b <= a, "with {b} > without {a}");
    assert!(b < a);
}
