//! Corpus ingestion and cleaning: CSV parsing, corpus filtering, entity
//! extraction, abusive-word masking and stopword removal.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Read, Write};

use chrono::{DateTime, NaiveDateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Lcg64;

/// One tweet and the exogenous fields that travel with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub source: String,
    pub screen_name: String,
    pub tagged_location: String,
    pub stated_location: String,
    pub country: String,
    pub state: String,
}

/// Logical fields of [`TweetRecord`], in the canonical column order.
pub const LOGICAL_FIELDS: [&str; 9] = [
    "id",
    "created_at",
    "text",
    "source",
    "screen_name",
    "tagged_location",
    "stated_location",
    "country",
    "state",
];

/// Maps each logical field to the column name used in a particular export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: BTreeMap<String, String>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            columns: LOGICAL_FIELDS.iter().map(|f| (f.to_string(), f.to_string())).collect(),
        }
    }
}

impl Schema {
    /// Overrides the column used for `field`. Unknown fields are an error.
    pub fn with_column(mut self, field: &str, column: &str) -> Result<Self> {
        if !LOGICAL_FIELDS.contains(&field) {
            return Err(Error::Argument(format!("unknown logical field `{field}`")));
        }
        self.columns.insert(field.to_string(), column.to_string());
        Ok(self)
    }

    pub fn column(&self, field: &str) -> &str {
        &self.columns[field]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    EmptyText,
    BadTimestamp,
    Malformed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub rows_read: usize,
    pub accepted: usize,
    pub rejected: BTreeMap<RejectReason, usize>,
}

impl ParseReport {
    pub fn total_rejected(&self) -> usize {
        self.rejected.values().sum()
    }

    fn reject(&mut self, reason: RejectReason) {
        *self.rejected.entry(reason).or_default() += 1;
    }
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(ts) = DateTime::parse_from_rfc3339(raw) {
        return Some(ts.with_timezone(&Utc));
    }
    NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S")
        .ok()
        .map(|naive| naive.and_utc())
}

/// Parses a UTF-8 CSV export with a header row into records.
///
/// A missing mapped column is fatal. Bad rows are skipped and counted in the
/// returned [`ParseReport`]; input order is preserved.
pub fn parse_tweet_csv<R: Read>(source: R, schema: &Schema) -> Result<(Vec<TweetRecord>, ParseReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);

    let headers = reader.byte_headers()?.clone();
    let mut positions = [0usize; LOGICAL_FIELDS.len()];
    for (slot, field) in positions.iter_mut().zip(LOGICAL_FIELDS) {
        let column = schema.column(field);
        *slot = headers
            .iter()
            .position(|h| h == column.as_bytes())
            .ok_or_else(|| Error::MissingColumn {
                field: field.to_string(),
                column: column.to_string(),
            })?;
    }

    let mut report = ParseReport::default();
    let mut records = Vec::new();
    for row in reader.byte_records() {
        report.rows_read += 1;
        let row = match row {
            Ok(row) => row,
            Err(err) if err.is_io_error() => return Err(err.into()),
            Err(_) => {
                report.reject(RejectReason::Malformed);
                continue;
            }
        };
        let mut fields: Vec<&str> = Vec::with_capacity(positions.len());
        for &pos in &positions {
            match row.get(pos).map(std::str::from_utf8) {
                Some(Ok(value)) => fields.push(value),
                _ => break,
            }
        }
        if fields.len() != positions.len() {
            report.reject(RejectReason::Malformed);
            continue;
        }
        let [id, created_at, text, source, screen_name, tagged, stated, country, state] = fields[..] else {
            unreachable!()
        };
        if text.trim().is_empty() {
            report.reject(RejectReason::EmptyText);
            continue;
        }
        let Some(created_at) = parse_timestamp(created_at) else {
            report.reject(RejectReason::BadTimestamp);
            continue;
        };
        let state = if state.trim().is_empty() {
            derive_state(tagged, stated)
        } else {
            state.trim().to_string()
        };
        records.push(TweetRecord {
            id: id.to_string(),
            created_at,
            text: text.to_string(),
            source: source.to_string(),
            screen_name: screen_name.to_string(),
            tagged_location: tagged.to_string(),
            stated_location: stated.to_string(),
            country: country.to_string(),
            state,
        });
        report.accepted += 1;
    }
    if report.total_rejected() > 0 {
        log::warn!(
            "rejected {} of {} rows: {:?}",
            report.total_rejected(),
            report.rows_read,
            report.rejected
        );
    }
    Ok((records, report))
}

/// Writes records in the canonical column layout that
/// [`parse_tweet_csv`] reads back with the default [`Schema`].
pub fn write_tweet_csv<W: Write>(records: &[TweetRecord], sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(LOGICAL_FIELDS)?;
    for r in records {
        let created_at = r.created_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        writer.write_record([
            r.id.as_str(),
            created_at.as_str(),
            r.text.as_str(),
            r.source.as_str(),
            r.screen_name.as_str(),
            r.tagged_location.as_str(),
            r.stated_location.as_str(),
            r.country.as_str(),
            r.state.as_str(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<csv sink>", e))?;
    Ok(())
}

const US_STATES: [&str; 51] = [
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "DC", "FL", "GA", "HI", "ID", "IL", "IN", "IA", "KS", "KY", "LA",
    "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY", "NC", "ND", "OH", "OK", "OR",
    "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV", "WI", "WY",
];

fn trailing_state_code(location: &str) -> Option<&'static str> {
    let last = location.rsplit(',').next()?.trim();
    if location.contains(',') {
        US_STATES.iter().copied().find(|code| *code == last)
    } else {
        None
    }
}

/// State code from `"City, ST"` style locations: tagged location first, then
/// the stated location, else empty.
pub fn derive_state(tagged_location: &str, stated_location: &str) -> String {
    trailing_state_code(tagged_location)
        .or_else(|| trailing_state_code(stated_location))
        .unwrap_or_default()
        .to_string()
}

/// Keeps records whose text contains `keyword` (case-insensitive) and, when
/// `country` is non-empty, whose country equals it.
pub fn filter_corpus(records: &[TweetRecord], keyword: &str, country: &str) -> Vec<TweetRecord> {
    let needle = keyword.to_lowercase();
    records
        .iter()
        .filter(|r| r.text.to_lowercase().contains(&needle))
        .filter(|r| country.is_empty() || r.country == country)
        .cloned()
        .collect()
}

/// Reads a word list: one word per line, `#` starts a comment, blank lines
/// ignored, words lowercased.
pub fn load_word_list<R: BufRead>(source: R) -> Result<Vec<String>> {
    let mut words = Vec::new();
    for line in source.lines() {
        let line = line.map_err(|e| Error::io("<word list>", e))?;
        let word = line.split('#').next().unwrap_or("").trim();
        if !word.is_empty() {
            words.push(word.to_lowercase());
        }
    }
    Ok(words)
}

/// Case-insensitive whole-word matcher over a word list.
#[derive(Debug, Clone)]
pub struct WordMatcher {
    regex: Option<Regex>,
}

impl WordMatcher {
    pub fn new<S: AsRef<str>>(words: &[S]) -> Result<Self> {
        let mut words: Vec<&str> = words
            .iter()
            .map(|w| w.as_ref().trim())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Ok(WordMatcher { regex: None });
        }
        // Longest first so alternation prefers the longest whole word.
        words.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        words.dedup();
        let alternation = words.iter().map(|w| regex::escape(w)).collect::<Vec<_>>().join("|");
        let regex = Regex::new(&format!(r"(?i)\b(?:{alternation})\b"))?;
        Ok(WordMatcher { regex: Some(regex) })
    }

    pub fn count(&self, text: &str) -> usize {
        self.regex.as_ref().map_or(0, |re| re.find_iter(text).count())
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.regex.as_ref().is_some_and(|re| re.is_match(text))
    }
}

/// Named keyword groups (e.g. `corona`, `flu`, `beer`), compiled once.
#[derive(Debug, Clone)]
pub struct KeywordGroups {
    groups: Vec<(String, WordMatcher)>,
}

impl KeywordGroups {
    pub fn new(groups: &BTreeMap<String, Vec<String>>) -> Result<Self> {
        let groups = groups
            .iter()
            .map(|(name, words)| Ok((name.clone(), WordMatcher::new(words)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(KeywordGroups { groups })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.groups.iter().map(|(n, _)| n.as_str())
    }
}

/// Entities found in one tweet text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySet {
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
    pub url_count: usize,
    pub keyword_hits: BTreeMap<String, usize>,
}

pub(crate) fn url_regex() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|\bt\.co/)\S*").unwrap())
}

pub(crate) fn hashtag_regex() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"#([A-Za-z0-9_]+)").unwrap())
}

pub(crate) fn mention_regex() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@([A-Za-z0-9_]+)").unwrap())
}

/// Extracts hashtags, mentions, URL count and keyword-group hits.
///
/// URLs are removed before sigil scanning so fragments like `/#top` inside a
/// link are not read as hashtags.
pub fn extract_entities(text: &str, groups: &KeywordGroups) -> EntitySet {
    let url_count = url_regex().find_iter(text).count();
    let stripped = url_regex().replace_all(text, " ");
    let hashtags = hashtag_regex()
        .captures_iter(&stripped)
        .map(|c| c[1].to_string())
        .collect();
    let mentions = mention_regex()
        .captures_iter(&stripped)
        .map(|c| c[1].to_string())
        .collect();
    let keyword_hits = groups
        .groups
        .iter()
        .map(|(name, matcher)| (name.clone(), matcher.count(text)))
        .collect();
    EntitySet {
        hashtags,
        mentions,
        url_count,
        keyword_hits,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedText {
    pub text: String,
    pub replacements: usize,
}

pub const MASK_PREFIX: &str = "abuvs";

/// Replaces abusive words with `abuvs` plus four seeded digits.
#[derive(Debug, Clone)]
pub struct AbusiveMasker {
    matcher: WordMatcher,
}

impl AbusiveMasker {
    pub fn new<S: AsRef<str>>(abusive_words: &[S]) -> Result<Self> {
        if abusive_words.is_empty() {
            return Err(Error::Argument("abusive word list is empty".into()));
        }
        Ok(AbusiveMasker {
            matcher: WordMatcher::new(abusive_words)?,
        })
    }

    pub fn mask(&self, text: &str, seed: u64) -> MaskedText {
        let Some(re) = &self.matcher.regex else {
            return MaskedText {
                text: text.to_string(),
                replacements: 0,
            };
        };
        let mut rng = Lcg64::new(seed);
        let mut replacements = 0;
        let masked = re.replace_all(text, |_: &regex::Captures<'_>| {
            replacements += 1;
            let mut token = String::from(MASK_PREFIX);
            for _ in 0..4 {
                token.push(char::from(b'0' + rng.next_digit()));
            }
            token
        });
        MaskedText {
            text: masked.into_owned(),
            replacements,
        }
    }

    /// Whether any abusive word survives in `text`.
    pub fn contains_abusive(&self, text: &str) -> bool {
        self.matcher.is_match(text)
    }
}

/// One-shot form of [`AbusiveMasker::mask`].
pub fn mask_abusive<S: AsRef<str>>(text: &str, abusive_words: &[S], seed: u64) -> Result<MaskedText> {
    Ok(AbusiveMasker::new(abusive_words)?.mask(text, seed))
}

/// Order-preserving removal of exact stopword matches.
pub fn remove_stopwords(tokens: &[String], stopwords: &HashSet<String>) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !stopwords.contains(t.as_str()))
        .cloned()
        .collect()
}
