use otkit_core::text::nfc;
use otkit_core::text_direction::{
    is_decimal_digit, reverse_document, reverse_line, segment_line, ReversalOptions,
};
use proptest::prelude::*;

fn mixed_text() -> impl Strategy<Value = String> {
    let pieces = prop_oneof![
        4 => "[a-zçğıöşü ]",
        2 => "[âîûñḳṭ]",
        2 => "[0-9]{1,3}",
        1 => "[٠-٩]{1,2}",
        1 => Just("n\u{303}".to_owned()),
        1 => Just("a\u{302}\u{301}".to_owned()),
        1 => Just("\u{301}".to_owned()),
        1 => "[(){}<>\\[\\].,'-]",
        1 => any::<char>().prop_map(String::from),
    ];
    prop::collection::vec(pieces, 0..24).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn reversal_is_an_involution(s in mixed_text()) {
        let opts = ReversalOptions::default();
        prop_assert_eq!(reverse_line(&reverse_line(&s, &opts), &opts), nfc(&s));
    }

    #[test]
    fn mirrored_reversal_is_an_involution(s in mixed_text()) {
        let opts = ReversalOptions { mirror_brackets: true, ..ReversalOptions::default() };
        prop_assert_eq!(reverse_line(&reverse_line(&s, &opts), &opts), nfc(&s));
    }

    #[test]
    fn reversal_keeps_the_grapheme_multiset(s in mixed_text()) {
        let opts = ReversalOptions::default();
        let mut a = segment_line(&s).into_graphemes();
        let mut b = segment_line(&reverse_line(&s, &opts)).into_graphemes();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn digit_runs_keep_their_order(s in "[a-z ]{0,5}[0-9]{1,6}[a-z ]{0,5}") {
        let digits: String = s.chars().filter(|c| is_decimal_digit(*c)).collect();
        let out = reverse_line(&s, &ReversalOptions::default());
        let out_digits: String = out.chars().filter(|c| is_decimal_digit(*c)).collect();
        prop_assert_eq!(digits, out_digits);
    }

    #[test]
    fn full_reversal_without_digit_runs(s in "[a-z0-9 ]{0,20}") {
        let opts = ReversalOptions { preserve_digit_runs: false, ..ReversalOptions::default() };
        let expected: String = s.chars().rev().collect();
        prop_assert_eq!(reverse_line(&s, &opts), expected);
    }
}

#[test]
fn transcription_examples() {
    let opts = ReversalOptions::default();
    assert_eq!(reverse_line("gavuruñ", &opts), "ñuruvag");
    assert_eq!(reverse_line("ğâbil", &opts), "libâğ");
    assert_eq!(reverse_line("sayfa 12", &opts), "12 afyas");
    assert_eq!(reverse_line("", &opts), "");
}

#[test]
fn documents_reverse_line_by_line() {
    let lines = ["gavuruñ", "", "sayfa 12"];
    let out = reverse_document(&lines, &ReversalOptions::default());
    assert_eq!(out, ["ñuruvag", "", "12 afyas"]);
    assert_eq!(reverse_document(&out, &ReversalOptions::default()), lines);
}
