//! Small text helpers shared across modules.

use unicode_normalization::UnicodeNormalization;

/// NFC-normalizes `s`.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Lowercases with Turkish casing rules (`I` → `ı`, `İ` → `i`).
pub fn turkish_lowercase(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            'I' => {
                // "I" followed by a combining dot above is a decomposed "İ".
                if chars.peek() == Some(&'\u{307}') {
                    chars.next();
                    out.push('i');
                } else {
                    out.push('ı');
                }
            }
            'İ' => out.push('i'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out
}

/// Splits a line into whitespace-separated tokens after NFC normalization.
/// Punctuation stays attached to its word.
pub fn tokenize(line: &str) -> Vec<String> {
    nfc(line).split_whitespace().map(str::to_owned).collect()
}
