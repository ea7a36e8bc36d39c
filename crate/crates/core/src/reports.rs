//! Descriptive reports: per-source feature summaries, frequency tables, the
//! daily fear curve, state-level sentiment aggregates and word-cloud data.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{EntitySet, TweetRecord};
use crate::lowess::lowess;
use crate::text::{rank_by_frequency, Document, NGramTable};

/// Keyword groups that get their own column in the source summary.
pub const SUMMARY_GROUPS: [&str; 5] = ["pols", "corona", "flu", "beer", "abusew"];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSummaryRow {
    pub source: String,
    pub total: u64,
    pub hashtags: u64,
    pub mentions: u64,
    pub urls: u64,
    pub pols: u64,
    pub corona: u64,
    pub flu: u64,
    pub beer: u64,
    pub abusew: u64,
}

impl SourceSummaryRow {
    fn features(&self) -> [u64; 8] {
        [
            self.hashtags,
            self.mentions,
            self.urls,
            self.pols,
            self.corona,
            self.flu,
            self.beer,
            self.abusew,
        ]
    }

    fn add(&mut self, entities: &EntitySet) {
        let hits = |g: &str| entities.keyword_hits.get(g).copied().unwrap_or(0) as u64;
        self.total += 1;
        self.hashtags += entities.hashtags.len() as u64;
        self.mentions += entities.mentions.len() as u64;
        self.urls += entities.url_count as u64;
        self.pols += hits("pols");
        self.corona += hits("corona");
        self.flu += hits("flu");
        self.beer += hits("beer");
        self.abusew += hits("abusew");
    }
}

/// One row per distinct source, largest `total` first (ties by name).
pub fn source_feature_summary<'a>(
    corpus: impl IntoIterator<Item = (&'a TweetRecord, &'a EntitySet)>,
) -> Vec<SourceSummaryRow> {
    let mut by_source: BTreeMap<&str, SourceSummaryRow> = BTreeMap::new();
    for (record, entities) in corpus {
        by_source
            .entry(record.source.as_str())
            .or_insert_with(|| SourceSummaryRow {
                source: record.source.clone(),
                ..Default::default()
            })
            .add(entities);
    }
    let mut rows: Vec<SourceSummaryRow> = by_source.into_values().collect();
    rows.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.source.cmp(&b.source)));
    rows
}

/// Feature counts divided by the row's tweet total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub source: String,
    pub total: u64,
    pub hashtags: f64,
    pub mentions: f64,
    pub urls: f64,
    pub pols: f64,
    pub corona: f64,
    pub flu: f64,
    pub beer: f64,
    pub abusew: f64,
}

impl RatioRow {
    pub fn ratios(&self) -> [f64; 8] {
        [
            self.hashtags,
            self.mentions,
            self.urls,
            self.pols,
            self.corona,
            self.flu,
            self.beer,
            self.abusew,
        ]
    }
}

pub fn relative_ratio_summary(rows: &[SourceSummaryRow]) -> Vec<RatioRow> {
    rows.iter()
        .filter(|row| {
            if row.total == 0 {
                log::warn!("source `{}` has zero tweets; skipped in ratio summary", row.source);
            }
            row.total > 0
        })
        .map(|row| {
            let t = row.total as f64;
            let [hashtags, mentions, urls, pols, corona, flu, beer, abusew] = row.features().map(|c| c as f64 / t);
            RatioRow {
                source: row.source.clone(),
                total: row.total,
                hashtags,
                mentions,
                urls,
                pols,
                corona,
                flu,
                beer,
                abusew,
            }
        })
        .collect()
}

/// Ranked `(value, frequency)` pairs; empty values are not counted.
pub fn frequency_table<S: AsRef<str>>(
    values: impl IntoIterator<Item = S>,
    top_k: usize,
) -> Result<Vec<(String, usize)>> {
    if top_k == 0 {
        return Err(Error::Argument("top_k must be at least 1".into()));
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for v in values {
        let v = v.as_ref().trim();
        if !v.is_empty() {
            *counts.entry(v.to_string()).or_default() += 1;
        }
    }
    Ok(rank_by_frequency(counts, top_k, 1))
}

/// Token frequencies across a (stopword-cleaned) corpus.
pub fn wordcloud_export(corpus: &[Document], top_k: usize) -> Result<Vec<(String, usize)>> {
    frequency_table(corpus.iter().flat_map(|d| d.tokens.iter()), top_k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub dates: Vec<NaiveDate>,
    pub counts: Vec<u64>,
    pub increments: Vec<i64>,
    pub smoothed: Vec<f64>,
}

/// Daily fear-dominant tweet counts over the full date range of the input
/// (missing days are zero), day-over-day increments, and a LOWESS trend of
/// count against day index.
pub fn fear_curve(corpus: &[(DateTime<Utc>, bool)], fraction: f64, iterations: usize) -> Result<DailySeries> {
    let mut per_day: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    for (ts, fear) in corpus {
        *per_day.entry(ts.date_naive()).or_default() += u64::from(*fear);
    }
    if per_day.len() < 2 {
        return Err(Error::Series(format!(
            "fear curve needs at least two distinct dates, found {}",
            per_day.len()
        )));
    }
    let first = *per_day.keys().next().unwrap();
    let last = *per_day.keys().next_back().unwrap();
    let dates: Vec<NaiveDate> = first.iter_days().take_while(|d| *d <= last).collect();
    let counts: Vec<u64> = dates.iter().map(|d| per_day.get(d).copied().unwrap_or(0)).collect();
    let increments = counts.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
    let xs: Vec<f64> = (0..counts.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
    let smoothed = lowess(&xs, &ys, fraction, iterations)?;
    Ok(DailySeries {
        dates,
        counts,
        increments,
        smoothed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateAggregate {
    pub state: String,
    pub mean_valence: f64,
    pub fear_share: f64,
    pub n: u64,
}

/// Mean valence and share of fear-dominant tweets per state, over
/// `(state, valence, fear_dominant)` triples. Empty states are ignored.
pub fn state_sentiment_aggregate<'a>(corpus: impl IntoIterator<Item = (&'a str, f64, bool)>) -> Vec<StateAggregate> {
    let mut acc: BTreeMap<&str, (f64, u64, u64)> = BTreeMap::new();
    for (state, valence, fear) in corpus {
        if state.is_empty() {
            continue;
        }
        let e = acc.entry(state).or_default();
        e.0 += valence;
        e.1 += u64::from(fear);
        e.2 += 1;
    }
    acc.into_iter()
        .map(|(state, (sum, fear, n))| StateAggregate {
            state: state.to_string(),
            mean_valence: sum / n as f64,
            fear_share: fear as f64 / n as f64,
            n,
        })
        .collect()
}

fn csv_writer<W: Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv sink>", e))
}

/// Ranked `(n-gram, frequency)` rows for one `n`.
pub type RankedNgrams = (usize, Vec<(Vec<String>, usize)>);

/// Writes `n,tokens,frequency` rows; returns the number of data rows.
pub fn write_ngrams_csv<W: Write>(tables: &[RankedNgrams], sink: W) -> Result<usize> {
    let mut w = csv_writer(sink);
    w.write_record(["n", "tokens", "frequency"])?;
    let mut rows = 0;
    for (n, ranked) in tables {
        for (gram, freq) in ranked {
            w.write_record([n.to_string(), gram.join(" "), freq.to_string()])?;
            rows += 1;
        }
    }
    finish(w)?;
    Ok(rows)
}

pub fn write_ngram_table_csv<W: Write>(table: &NGramTable, sink: W) -> Result<usize> {
    let ranked = rank_by_frequency(table.counts.clone(), usize::MAX, 1);
    write_ngrams_csv(&[(table.n, ranked)], sink)
}

pub fn write_frequency_csv<W: Write>(header: [&str; 2], rows: &[(String, usize)], sink: W) -> Result<usize> {
    let mut w = csv_writer(sink);
    w.write_record(header)?;
    for (value, freq) in rows {
        w.write_record([value.as_str(), &freq.to_string()])?;
    }
    finish(w)?;
    Ok(rows.len())
}

pub fn write_source_summary_csv<W: Write>(rows: &[SourceSummaryRow], sink: W) -> Result<usize> {
    let mut w = csv_writer(sink);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record([
            "source", "total", "hashtags", "mentions", "urls", "pols", "corona", "flu", "beer", "abusew",
        ])?;
    }
    finish(w)?;
    Ok(rows.len())
}

pub fn write_ratio_csv<W: Write>(rows: &[RatioRow], sink: W) -> Result<usize> {
    let mut w = csv_writer(sink);
    w.write_record([
        "source", "total", "hashtags", "mentions", "urls", "pols", "corona", "flu", "beer", "abusew",
    ])?;
    for row in rows {
        let mut rec = vec![row.source.clone(), row.total.to_string()];
        rec.extend(row.ratios().iter().map(|r| r.to_string()));
        w.write_record(&rec)?;
    }
    finish(w)?;
    Ok(rows.len())
}

pub fn write_fear_curve_csv<W: Write>(series: &DailySeries, sink: W) -> Result<usize> {
    let mut w = csv_writer(sink);
    w.write_record(["date", "count", "increment", "smoothed"])?;
    for i in 0..series.dates.len() {
        let increment = if i == 0 {
            String::new()
        } else {
            series.increments[i - 1].to_string()
        };
        w.write_record([
            series.dates[i].format("%Y-%m-%d").to_string(),
            series.counts[i].to_string(),
            increment,
            series.smoothed[i].to_string(),
        ])?;
    }
    finish(w)?;
    Ok(series.dates.len())
}

pub fn write_state_csv<W: Write>(rows: &[StateAggregate], sink: W) -> Result<usize> {
    let mut w = csv_writer(sink);
    w.write_record(["state", "mean_valence", "fear_share", "n"])?;
    for r in rows {
        w.write_record([
            r.state.clone(),
            r.mean_valence.to_string(),
            r.fear_share.to_string(),
            r.n.to_string(),
        ])?;
    }
    finish(w)?;
    Ok(rows.len())
}
