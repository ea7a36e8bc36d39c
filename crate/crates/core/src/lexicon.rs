//! Word-level sentiment and emotion lexicons.
//!
//! The on-disk layout is the three-column `word<TAB>category<TAB>flag` TSV
//! used by the NRC emotion lexicon. Only rows with flag `1` matter; the
//! `positive` and `negative` categories also feed the unit valence table.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::Document;
use crate::{ClassLabel, NEGATIVE, POSITIVE};

/// Lexicon categories, declared in lexicographic order so the derived `Ord`
/// doubles as the dominant-emotion tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Anticipation,
    Disgust,
    Fear,
    Joy,
    Negative,
    Positive,
    Sadness,
    Surprise,
    Trust,
}

impl Emotion {
    pub const ALL: [Emotion; 10] = [
        Emotion::Anger,
        Emotion::Anticipation,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Negative,
        Emotion::Positive,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Trust,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Anticipation => "anticipation",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Negative => "negative",
            Emotion::Positive => "positive",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
            Emotion::Trust => "trust",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    valence: HashMap<String, f64>,
    emotions: HashMap<String, BTreeSet<Emotion>>,
}

impl SentimentLexicon {
    pub fn valence_of(&self, word: &str) -> Option<f64> {
        self.valence.get(word).copied()
    }

    pub fn emotions_of(&self, word: &str) -> Option<&BTreeSet<Emotion>> {
        self.emotions.get(word)
    }

    pub fn len(&self) -> usize {
        self.emotions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.emotions.is_empty()
    }

    /// Copy with every valence sign flipped.
    pub fn negated(&self) -> SentimentLexicon {
        SentimentLexicon {
            valence: self.valence.iter().map(|(w, v)| (w.clone(), -v)).collect(),
            emotions: self.emotions.clone(),
        }
    }

    pub fn valence_table(&self) -> BTreeMap<&str, f64> {
        self.valence.iter().map(|(w, v)| (w.as_str(), *v)).collect()
    }

    pub fn emotion_table(&self) -> BTreeMap<&str, &BTreeSet<Emotion>> {
        self.emotions.iter().map(|(w, e)| (w.as_str(), e)).collect()
    }
}

/// Loads a lexicon TSV. Malformed rows and unknown categories are fatal and
/// report the 1-based line number. Blank lines are skipped.
pub fn load_lexicon<R: BufRead>(source: R) -> Result<SentimentLexicon> {
    let mut lex = SentimentLexicon::default();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io("<lexicon>", e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [word, category, flag] = cols[..] else {
            return Err(Error::Lexicon {
                line: line_no,
                message: format!("expected 3 tab-separated columns, found {}", cols.len()),
            });
        };
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            return Err(Error::Lexicon {
                line: line_no,
                message: "empty word".into(),
            });
        }
        let category: Emotion = category
            .trim()
            .parse()
            .map_err(|message| Error::Lexicon { line: line_no, message })?;
        let flag = match flag.trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Lexicon {
                    line: line_no,
                    message: format!("flag must be 0 or 1, got `{other}`"),
                })
            }
        };
        if !flag {
            continue;
        }
        lex.emotions.entry(word.clone()).or_default().insert(category);
        match category {
            Emotion::Positive => {
                lex.valence.insert(word, 1.0);
            }
            Emotion::Negative => {
                lex.valence.insert(word, -1.0);
            }
            _ => {}
        }
    }
    Ok(lex)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub value: f64,
    pub matched: usize,
    pub label: Polarity,
}

/// Mean valence of the lexicon hits in `doc`; zero and neutral when nothing
/// matches.
pub fn valence_score(doc: &Document, lex: &SentimentLexicon) -> SentimentScore {
    let (sum, matched) = doc
        .tokens
        .iter()
        .filter_map(|t| lex.valence_of(t))
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    let value = sum / matched.max(1) as f64;
    let label = if value > 0.0 {
        Polarity::Positive
    } else if value < 0.0 {
        Polarity::Negative
    } else {
        Polarity::Neutral
    };
    SentimentScore { value, matched, label }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmotionProfile {
    pub counts: BTreeMap<Emotion, usize>,
    pub dominant: Option<Emotion>,
}

impl EmotionProfile {
    pub fn count(&self, emotion: Emotion) -> usize {
        self.counts.get(&emotion).copied().unwrap_or(0)
    }
}

pub fn emotion_profile(doc: &Document, lex: &SentimentLexicon) -> EmotionProfile {
    let mut counts: BTreeMap<Emotion, usize> = Emotion::ALL.iter().map(|e| (*e, 0)).collect();
    for token in &doc.tokens {
        if let Some(set) = lex.emotions_of(token) {
            for e in set {
                *counts.get_mut(e).expect("all categories present") += 1;
            }
        }
    }
    // max_by_key keeps the last maximum; iterate in reverse so the
    // lexicographically smallest category wins ties.
    let dominant = counts
        .iter()
        .rev()
        .filter(|(_, c)| **c > 0)
        .max_by_key(|(_, c)| **c)
        .map(|(e, _)| *e);
    EmotionProfile { counts, dominant }
}

/// Binary training label; neutral scores are excluded from classifier data.
pub fn label_binary(score: &SentimentScore) -> Option<ClassLabel> {
    if score.value > 0.0 {
        Some(POSITIVE)
    } else if score.value < 0.0 {
        Some(NEGATIVE)
    } else {
        None
    }
}
