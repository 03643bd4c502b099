//! Ranked most-frequent-word vocabulary built from training books.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{TokenizedBook, TokenizedText};
use crate::error::{Error, Result};

pub const VOCABULARY_VERSION: u32 = 1;

/// Honorifics dropped from every vocabulary: they only ever introduce a name.
pub const HONORIFICS: &[&str] = &["mr", "mrs", "ms", "messrs", "dr", "mme", "mlle"];

/// Words that are always capitalized but are not names.
const ALWAYS_CAPITALIZED: &[&str] = &["i"];

/// Heuristic stand-in for named-entity removal.
///
/// A token is treated as a name when it occurs at least `min_occurrences`
/// times and at least `min_capitalized_ratio` of its occurrences that are
/// not sentence-initial start with an uppercase letter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NameFilterPolicy {
    pub enabled: bool,
    pub min_occurrences: u64,
    pub min_capitalized_ratio: f64,
    pub drop_honorifics: bool,
}

impl Default for NameFilterPolicy {
    fn default() -> Self {
        NameFilterPolicy {
            enabled: true,
            min_occurrences: 10,
            min_capitalized_ratio: 0.95,
            drop_honorifics: true,
        }
    }
}

impl NameFilterPolicy {
    pub fn disabled() -> Self {
        NameFilterPolicy {
            enabled: false,
            drop_honorifics: false,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct TokenStats {
    count: u64,
    inner: u64,
    inner_capitalized: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary directly from a ranked word list.
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidArgument("vocabulary must not be empty".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vocabulary word {w:?}")));
            }
        }
        Ok(Vocabulary { words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn lookup(&self, token: &str) -> Option<usize> {
        self.index.get(token).map(|&i| i as usize)
    }

    /// The first `k` words of this vocabulary.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k > self.len() {
            return Err(Error::VocabularyTooSmall {
                requested: k,
                available: self.len(),
            });
        }
        Vocabulary::from_words(self.words[..k].to_vec())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    version: u32,
    k: usize,
    words: Vec<String>,
}

impl Serialize for Vocabulary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VocabularyFile {
            version: VOCABULARY_VERSION,
            k: self.words.len(),
            words: self.words.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = VocabularyFile::deserialize(d)?;
        if file.version != VOCABULARY_VERSION {
            return Err(D::Error::custom(format!("unsupported vocabulary version {}", file.version)));
        }
        if file.k != file.words.len() {
            return Err(D::Error::custom(format!("k = {} but {} words", file.k, file.words.len())));
        }
        Vocabulary::from_words(file.words).map_err(D::Error::custom)
    }
}

fn accumulate(stats: &mut HashMap<String, TokenStats>, text: &TokenizedText) {
    for (s, sentence) in text.sentences.iter().enumerate() {
        let caps = text.capitalized.get(s);
        for (i, word) in sentence.iter().enumerate() {
            let entry = stats.entry(word.clone()).or_default();
            entry.count += 1;
            if i > 0 {
                entry.inner += 1;
                if caps.and_then(|c| c.get(i)).copied().unwrap_or(false) {
                    entry.inner_capitalized += 1;
                }
            }
        }
    }
}

fn is_name(word: &str, stats: &TokenStats, policy: &NameFilterPolicy) -> bool {
    if policy.drop_honorifics && HONORIFICS.contains(&word) {
        return true;
    }
    if !policy.enabled || ALWAYS_CAPITALIZED.contains(&word) {
        return false;
    }
    stats.count >= policy.min_occurrences
        && stats.inner > 0
        && stats.inner_capitalized as f64 >= policy.min_capitalized_ratio * stats.inner as f64
}

/// Ranks the admissible tokens of `texts` by frequency (ties broken
/// lexicographically) and keeps the top `k`.
pub fn build_vocabulary_from_texts<'a, I>(texts: I, k: usize, policy: &NameFilterPolicy) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a TokenizedText>,
{
    if k == 0 {
        return Err(Error::InvalidArgument("vocabulary size must be at least 1".into()));
    }
    let mut stats: HashMap<String, TokenStats> = HashMap::new();
    let mut any = false;
    for text in texts {
        any = true;
        accumulate(&mut stats, text);
    }
    if !any {
        return Err(Error::InvalidArgument("no training books".into()));
    }

    let mut ranked: Vec<(String, u64)> = stats
        .into_iter()
        .filter(|(w, s)| !is_name(w, s, policy))
        .map(|(w, s)| (w, s.count))
        .collect();
    if ranked.len() < k {
        return Err(Error::VocabularyTooSmall {
            requested: k,
            available: ranked.len(),
        });
    }
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    Vocabulary::from_words(ranked.into_iter().map(|(w, _)| w).collect())
}

pub fn build_vocabulary(training_books: &[TokenizedBook], k: usize, policy: &NameFilterPolicy) -> Result<Vocabulary> {
    build_vocabulary_from_texts(training_books.iter().map(|b| &b.text), k, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn build(text: &str, k: usize) -> Result<Vocabulary> {
        build_vocabulary_from_texts([&tokenize(text)], k, &NameFilterPolicy::default())
    }

    #[test]
    fn counts_and_ranks() {
        let v = build("the cat the dog the cat", 2).unwrap();
        assert_eq!(v.words(), ["the", "cat"]);
    }

    #[test]
    fn lexicographic_tie_break() {
        let v = build("b a b a b a b a b a c", 3).unwrap();
        assert_eq!(v.words(), ["a", "b", "c"]);
    }

    #[test]
    fn capitalized_name_excluded() {
        let mut text = String::new();
        for _ in 0..12 {
            text.push_str("we saw London there. ");
        }
        text.push_str("London was grey. ");
        let t = tokenize(&text);
        let v = build_vocabulary_from_texts([&t], 4, &NameFilterPolicy::default()).unwrap();
        assert!(v.lookup("london").is_none());
        assert_eq!(v.words(), ["saw", "there", "we", "grey"]);

        let kept = build_vocabulary_from_texts([&t], 4, &NameFilterPolicy::disabled()).unwrap();
        assert_eq!(kept.lookup("london"), Some(0));
    }

    #[test]
    fn rare_capitalized_token_kept() {
        // Fewer than ten occurrences: not enough evidence for a name.
        let v = build("we saw London. we saw London. we", 3).unwrap();
        assert_eq!(v.words(), ["we", "london", "saw"]);
    }

    #[test]
    fn pronoun_i_and_honorifics() {
        let text = "so I went and I came and I sat and I ran and I hid and I sang and I \
                    fell and I rose and I spoke and I slept. Mr. Brown went.";
        let v = build(text, 3).unwrap();
        assert_eq!(v.words(), ["i", "and", "went"]);
        assert!(build(text, 14).unwrap().lookup("mr").is_none());
    }

    #[test]
    fn too_small() {
        assert!(matches!(build("a b", 3), Err(Error::VocabularyTooSmall { requested: 3, available: 2 })));
        assert!(build("a", 0).is_err());
        assert!(build_vocabulary_from_texts(std::iter::empty(), 1, &NameFilterPolicy::default()).is_err());
    }

    #[test]
    fn lookup_cases() {
        let v = Vocabulary::from_words(vec!["the".into(), "cat".into()]).unwrap();
        assert_eq!(v.lookup("cat"), Some(1));
        assert_eq!(v.lookup("dog"), None);
        assert_eq!(v.lookup(""), None);
    }

    #[test]
    fn json_format() {
        let v = Vocabulary::from_words(vec!["the".into(), "cat".into()]).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json, serde_json::json!({"version": 1, "k": 2, "words": ["the", "cat"]}));
        assert_eq!(Vocabulary::from_json(&v.to_json().unwrap()).unwrap(), v);
        assert!(Vocabulary::from_json(r#"{"version":2,"k":1,"words":["a"]}"#).is_err());
        assert!(Vocabulary::from_json(r#"{"version":1,"k":2,"words":["a"]}"#).is_err());
        assert!(Vocabulary::from_json(r#"{"version":1,"k":2,"words":["a","a"]}"#).is_err());
    }
}
