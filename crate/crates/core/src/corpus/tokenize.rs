//! Rule-based sentence segmentation and word tokenization.
//!
//! A sentence ends at a run of `.`, `!` or `?` (plus any closing quotes or
//! brackets) that is followed by whitespace and then an uppercase letter, an
//! opening quote and an uppercase letter, or the end of the text. A period
//! directly after one of [`ABBREVIATIONS`] never ends a sentence.
//!
//! Words are maximal runs of alphabetic characters, where an apostrophe or a
//! hyphen is kept only when it sits between two letters. Everything else,
//! digits included, separates words.

use serde::{Deserialize, Serialize};

/// Lowercase abbreviations whose trailing period does not end a sentence.
pub const ABBREVIATIONS: &[&str] = &["mr", "mrs", "dr", "st", "etc", "vol", "no", "ch"];

/// Tokenizer output: lowercase words grouped by sentence.
///
/// `capitalized` runs parallel to `sentences` and records whether each word
/// started with an uppercase letter in the raw text. The vocabulary name
/// filter needs it; nothing else does.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedText {
    pub sentences: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub capitalized: Vec<Vec<bool>>,
}

impl TokenizedText {
    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }
}

pub fn tokenize(text: &str) -> TokenizedText {
    let mut out = TokenizedText::default();
    for segment in split_sentences(text) {
        let (words, caps) = tokenize_words(segment);
        if !words.is_empty() {
            out.sentences.push(words);
            out.capitalized.push(caps);
        }
    }
    out
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201D}' | '\u{2019}' | ')' | ']')
}

fn is_opening_quote(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201C}' | '\u{2018}')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

/// Splits `text` into raw sentence segments (which may still be empty of
/// words).
pub fn split_sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let n = chars.len();
    let byte_at = |i: usize| if i < n { chars[i].0 } else { text.len() };

    let mut segments = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < n {
        if !is_terminator(chars[i].1) {
            i += 1;
            continue;
        }
        let mut end = i;
        while end < n && is_terminator(chars[end].1) {
            end += 1;
        }
        while end < n && is_closing(chars[end].1) {
            end += 1;
        }

        let abbreviated = chars[i].1 == '.' && follows_abbreviation(&chars, i);

        let mut next = end;
        while next < n && chars[next].1.is_whitespace() {
            next += 1;
        }
        let boundary = if next == n {
            true
        } else if next == end {
            false
        } else {
            let c = chars[next].1;
            c.is_uppercase()
                || (is_opening_quote(c) && next + 1 < n && chars[next + 1].1.is_uppercase())
        };

        if boundary && !abbreviated {
            let cut = byte_at(end);
            segments.push(&text[start..cut]);
            start = cut;
        }
        i = end;
    }
    if start < text.len() {
        segments.push(&text[start..]);
    }
    segments
}

fn follows_abbreviation(chars: &[(usize, char)], dot: usize) -> bool {
    let mut begin = dot;
    while begin > 0 && chars[begin - 1].1.is_alphabetic() {
        begin -= 1;
    }
    if begin == dot || dot - begin > 3 {
        return false;
    }
    let word: String = chars[begin..dot]
        .iter()
        .flat_map(|&(_, c)| c.to_lowercase())
        .collect();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Word tokens of one segment, lowercased, with their raw capitalization.
fn tokenize_words(segment: &str) -> (Vec<String>, Vec<bool>) {
    let chars: Vec<char> = segment.chars().collect();
    let mut words = Vec::new();
    let mut caps = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_alphabetic() {
            i += 1;
            continue;
        }
        let capitalized = chars[i].is_uppercase();
        let mut word = String::new();
        loop {
            push_lower(&mut word, chars[i]);
            i += 1;
            if i >= chars.len() {
                break;
            }
            let c = chars[i];
            if c.is_alphabetic() {
                continue;
            }
            let joiner = is_apostrophe(c) || c == '-';
            if joiner && i + 1 < chars.len() && chars[i + 1].is_alphabetic() {
                word.push(if c == '-' { '-' } else { '\'' });
                i += 1;
                continue;
            }
            break;
        }
        words.push(word);
        caps.push(capitalized);
    }
    (words, caps)
}

fn push_lower(word: &mut String, c: char) {
    // Some lowercase mappings emit combining marks; those are outside the
    // token grammar.
    word.extend(c.to_lowercase().filter(|l| l.is_alphabetic()));
}

/// True when `token` matches the token grammar and is lowercase.
pub fn is_valid_token(token: &str) -> bool {
    let chars: Vec<char> = token.chars().collect();
    if chars.is_empty() || !chars[0].is_alphabetic() || !chars[chars.len() - 1].is_alphabetic() {
        return false;
    }
    chars.iter().enumerate().all(|(i, &c)| {
        if c.is_alphabetic() {
            !c.is_uppercase()
        } else if c == '\'' || c == '-' {
            chars[i - 1].is_alphabetic() && chars[i + 1].is_alphabetic()
        } else {
            false
        }
    })
}
