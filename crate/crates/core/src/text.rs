//! Tokenization, n-gram counting and vocabulary construction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{hashtag_regex, mention_regex, url_regex};
use crate::porter;

/// Splits text into lowercase word tokens over `[a-z0-9']`.
///
/// URLs, `@mentions` and `#hashtags` are dropped first; they are counted by
/// [`crate::ingest::extract_entities`] instead.
pub fn tokenize(text: &str) -> Vec<String> {
    let stripped = url_regex().replace_all(text, " ");
    let stripped = mention_regex().replace_all(&stripped, " ");
    let stripped = hashtag_regex().replace_all(&stripped, " ");
    let lowered = stripped.to_lowercase().replace('\u{2019}', "'");
    lowered
        .split(|c: char| !(c.is_ascii_lowercase() || c.is_ascii_digit() || c == '\''))
        .map(|piece| piece.trim_matches('\''))
        .filter(|piece| !piece.is_empty())
        .map(str::to_string)
        .collect()
}

/// A tokenized tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub record_id: String,
    pub tokens: Vec<String>,
    /// Character count of the original text, used for length buckets.
    pub char_length: usize,
}

impl Document {
    pub fn from_text(record_id: impl Into<String>, text: &str) -> Self {
        Document {
            record_id: record_id.into(),
            tokens: tokenize(text),
            char_length: text.chars().count(),
        }
    }

    pub fn from_tokens<S: AsRef<str>>(record_id: impl Into<String>, tokens: &[S], char_length: usize) -> Self {
        Document {
            record_id: record_id.into(),
            tokens: tokens.iter().map(|t| t.as_ref().to_string()).collect(),
            char_length,
        }
    }

    /// Same document with every token replaced by its Porter stem.
    pub fn stemmed(&self) -> Document {
        Document {
            record_id: self.record_id.clone(),
            tokens: self.tokens.iter().map(|t| porter::stem(t)).collect(),
            char_length: self.char_length,
        }
    }
}

pub const MAX_NGRAM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramTable {
    pub n: usize,
    pub counts: BTreeMap<Vec<String>, usize>,
}

impl NGramTable {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=MAX_NGRAM).contains(&n) {
            return Err(Error::Argument(format!("n-gram order {n} outside 1..={MAX_NGRAM}")));
        }
        Ok(NGramTable {
            n,
            counts: BTreeMap::new(),
        })
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Adds another table's counts. Order of merges does not matter.
    pub fn merge(&mut self, other: &NGramTable) {
        debug_assert_eq!(self.n, other.n);
        for (gram, count) in &other.counts {
            *self.counts.entry(gram.clone()).or_default() += count;
        }
    }

    fn add_tokens(&mut self, tokens: &[String]) {
        for window in tokens.windows(self.n) {
            *self.counts.entry(window.to_vec()).or_default() += 1;
        }
    }
}

/// Sliding-window n-gram counts over one token list.
pub fn ngrams(tokens: &[String], n: usize) -> Result<NGramTable> {
    let mut table = NGramTable::new(n)?;
    table.add_tokens(tokens);
    Ok(table)
}

/// Corpus n-gram counts; windows never span two documents.
pub fn corpus_ngrams(corpus: &[Document], n: usize) -> Result<NGramTable> {
    let mut table = NGramTable::new(n)?;
    for doc in corpus {
        table.add_tokens(&doc.tokens);
    }
    Ok(table)
}

/// Sorts by descending count then ascending key, drops entries below
/// `min_count`, keeps the first `k`.
pub fn rank_by_frequency<K: Ord>(
    counts: impl IntoIterator<Item = (K, usize)>,
    k: usize,
    min_count: usize,
) -> Vec<(K, usize)> {
    let mut ranked: Vec<(K, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

pub fn top_ngrams(corpus: &[Document], n: usize, k: usize, min_freq: usize) -> Result<Vec<(Vec<String>, usize)>> {
    if k == 0 || min_freq == 0 {
        return Err(Error::Argument("k and min_freq must be at least 1".into()));
    }
    let table = corpus_ngrams(corpus, n)?;
    Ok(rank_by_frequency(table.counts, k, min_freq))
}

/// Fixed word list with a reverse index. Position 0 is the most frequent
/// word; ties are broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(words: Vec<String>) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocabulary { words, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(vocab: Vocabulary) -> Self {
        vocab.words
    }
}

impl Vocabulary {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Most frequent `max_size` tokens across the corpus.
pub fn build_vocabulary(corpus: &[Document], max_size: usize) -> Result<Vocabulary> {
    if max_size == 0 {
        return Err(Error::Argument("vocabulary max_size must be at least 1".into()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for token in &doc.tokens {
            *counts.entry(token.as_str()).or_default() += 1;
        }
    }
    let ranked = rank_by_frequency(counts, max_size, 1);
    Ok(Vocabulary::from(
        ranked.into_iter().map(|(w, _)| w.to_string()).collect::<Vec<_>>(),
    ))
}
