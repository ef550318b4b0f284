//! Text normalization, tokenization and sentence splitting shared by the
//! extraction, embedding and evaluation modules.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::hash::sha256_hex;

/// Opening/closing quotation mark pairs stripped from quote text.
const QUOTE_PAIRS: &[(char, char)] = &[
    ('"', '"'),
    ('\'', '\''),
    ('\u{201C}', '\u{201D}'), // “ ”
    ('\u{201E}', '\u{201C}'), // „ “
    ('\u{201E}', '\u{201D}'), // „ ”
    ('\u{201D}', '\u{201D}'), // ” ”
    ('\u{2018}', '\u{2019}'), // ‘ ’
    ('\u{201A}', '\u{2018}'), // ‚ ‘
    ('\u{201A}', '\u{2019}'), // ‚ ’
    ('\u{00AB}', '\u{00BB}'), // « »
    ('\u{00BB}', '\u{00AB}'), // » «
    ('\u{2039}', '\u{203A}'), // ‹ ›
    ('\u{203A}', '\u{2039}'), // › ‹
    ('\u{300C}', '\u{300D}'), // 「 」
    ('\u{300E}', '\u{300F}'), // 『 』
];

/// Trims and collapses every run of Unicode whitespace to a single ASCII space.
pub fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Canonical form of quote text: whitespace collapsed and any surrounding
/// quotation-mark pair removed, repeatedly, so the function is idempotent.
pub fn normalize_text(s: &str) -> String {
    let mut cur = collapse_whitespace(s);
    loop {
        let stripped = strip_quote_pair(&cur);
        match stripped {
            Some(inner) => cur = collapse_whitespace(inner),
            None => return cur,
        }
    }
}

fn strip_quote_pair(s: &str) -> Option<&str> {
    let mut chars = s.chars();
    let first = chars.next()?;
    let last = chars.next_back()?;
    QUOTE_PAIRS
        .iter()
        .any(|&(open, close)| open == first && close == last)
        .then(|| &s[first.len_utf8()..s.len() - last.len_utf8()])
}

/// Normalized section heading used for stop-list matching.
pub fn normalize_heading(s: &str) -> String {
    collapse_whitespace(&s.to_lowercase())
}

/// Key under which embedding vectors are stored: SHA-256 hex of the
/// normalized text.
pub fn text_key(text: &str) -> String {
    sha256_hex(&normalize_text(text))
}

/// Lowercased alphanumeric tokens.
pub fn tokens(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "u.s", "u.k",
    "no", "gen", "col", "lt", "sgt", "capt", "gov", "sen", "rep", "rev", "hon", "inc", "ltd",
    "co", "corp", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov",
    "dec", "fig", "approx", "ca", "cf", "al",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201D}', '\u{2019}', '\u{00BB}'];

/// Splits text into sentence byte ranges (trimmed, never empty).
///
/// A boundary is a run of `.`/`!`/`?` (plus closing quotes or brackets)
/// followed by whitespace or end of text. A period does not end a sentence
/// after a listed abbreviation or a single-letter initial, or when the next
/// word starts lowercase.
pub fn split_sentences(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let mut end = i + c.len_utf8();
        while let Some(&(j, n)) = iter.peek() {
            if matches!(n, '.' | '!' | '?') || CLOSERS.contains(&n) {
                end = j + n.len_utf8();
                iter.next();
            } else {
                break;
            }
        }
        let rest = &text[end..];
        if !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
            continue;
        }
        if c == '.' && !period_ends_sentence(&text[start..i], rest) {
            continue;
        }
        push_trimmed(text, start..end, &mut out);
        start = end;
    }
    push_trimmed(text, start..text.len(), &mut out);
    out
}

fn period_ends_sentence(before: &str, rest: &str) -> bool {
    let word = before
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric());
    let lower = word.to_lowercase();
    let mut wc = word.chars();
    let single_initial = matches!((wc.next(), wc.next()), (Some(ch), None) if ch.is_alphabetic() && ch.is_uppercase());
    if single_initial || ABBREVIATIONS.contains(&lower.as_str()) {
        return false;
    }
    match rest.trim_start().chars().next() {
        Some(ch) => !ch.is_lowercase(),
        None => true,
    }
}

fn push_trimmed(text: &str, r: Range<usize>, out: &mut Vec<Range<usize>>) {
    let slice = &text[r.clone()];
    let lead = slice.len() - slice.trim_start().len();
    let trail = slice.len() - slice.trim_end().len();
    if lead + trail < slice.len() {
        out.push(r.start + lead..r.end - trail);
    }
}
