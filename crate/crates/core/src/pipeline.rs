//! Batch orchestration: ingest -> clean -> score -> {reports, classify}.
//!
//! Every stage reads the previous stage's JSON-lines file from the output
//! directory, so stages can be re-run independently. Each emitted file is
//! recorded in `manifest.json` with its row count and SHA-256.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::{balanced_split, EvaluationReport, LabeledDocument, LengthBucket};
use crate::ingest::{
    self, extract_entities, filter_corpus, load_word_list, parse_tweet_csv, remove_stopwords, AbusiveMasker, EntitySet,
    KeywordGroups, Schema, TweetRecord,
};
use crate::lexicon::{
    self, emotion_profile, label_binary, valence_score, Emotion, EmotionProfile, SentimentLexicon, SentimentScore,
};
use crate::lr::{train_lr, vectorize, FeatureVector, LrModel};
use crate::nb::{train_nb, NbModel};
use crate::reports;
use crate::text::{build_vocabulary, top_ngrams, Document, MAX_NGRAM};
use crate::ClassLabel;

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const CLEANED_FILE: &str = "cleaned.jsonl";
pub const SCORED_FILE: &str = "scored.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Clean,
    Score,
    Reports,
    Classify,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Ingest,
        Stage::Clean,
        Stage::Score,
        Stage::Reports,
        Stage::Classify,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Clean => "clean",
            Stage::Score => "score",
            Stage::Reports => "reports",
            Stage::Classify => "classify",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }
}

/// Individual outputs a run can be asked to produce. Subcommands select a
/// subset; `run-all` selects everything in the requested stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Ingest,
    Clean,
    Score,
    Ngrams,
    Summarize,
    FearCurve,
    GeoMap,
    TrainNb,
    TrainLr,
    Evaluate,
}

impl Task {
    pub const ALL: [Task; 10] = [
        Task::Ingest,
        Task::Clean,
        Task::Score,
        Task::Ngrams,
        Task::Summarize,
        Task::FearCurve,
        Task::GeoMap,
        Task::TrainNb,
        Task::TrainLr,
        Task::Evaluate,
    ];

    pub fn stage(self) -> Stage {
        match self {
            Task::Ingest => Stage::Ingest,
            Task::Clean => Stage::Clean,
            Task::Score => Stage::Score,
            Task::Ngrams | Task::Summarize | Task::FearCurve | Task::GeoMap => Stage::Reports,
            Task::TrainNb | Task::TrainLr | Task::Evaluate => Stage::Classify,
        }
    }

    pub fn for_stages(stages: &[Stage]) -> Vec<Task> {
        Task::ALL.into_iter().filter(|t| stages.contains(&t.stage())).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Vec<PathBuf>,
    pub lexicon: PathBuf,
    pub stopwords: PathBuf,
    pub abusive: PathBuf,
    pub keyword_groups: PathBuf,
    pub keyword: String,
    pub country: String,
    pub vocab_size: usize,
    pub eta: f64,
    pub epochs: usize,
    pub buckets: Vec<usize>,
    pub test_size: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub lowess_fraction: f64,
    pub lowess_iterations: usize,
    pub top_k: usize,
    pub min_freq: usize,
}

/// Keys accepted in config files and as `--key value` overrides.
pub const CONFIG_KEYS: [&str; 18] = [
    "corpus",
    "lexicon",
    "stopwords",
    "abusive",
    "keyword_groups",
    "keyword",
    "country",
    "vocab_size",
    "eta",
    "epochs",
    "buckets",
    "test_size",
    "seed",
    "out",
    "lowess_fraction",
    "lowess_iterations",
    "top_k",
    "min_freq",
];

/// Parses a flat `key = value` file. `#` starts a comment line.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| Error::Config(format!("invalid value `{raw}` for `{key}`"))),
    }
}

impl RunConfig {
    /// Builds a config from key/value pairs. Relative paths resolve against
    /// `base_dir` (the config file's directory).
    pub fn from_map(map: &BTreeMap<String, String>, base_dir: &Path) -> Result<Self> {
        let path = |key: &str| -> Result<PathBuf> {
            let raw = map
                .get(key)
                .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))?;
            Ok(base_dir.join(raw))
        };
        let corpus = map
            .get("corpus")
            .ok_or_else(|| Error::Config("missing required key `corpus`".into()))?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| base_dir.join(s))
            .collect();
        let buckets = match map.get("buckets") {
            None => crate::eval::DEFAULT_BUCKETS.to_vec(),
            Some(raw) => raw
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid bucket bound `{s}`")))
                })
                .collect::<Result<Vec<usize>>>()?,
        };
        Ok(RunConfig {
            corpus,
            lexicon: path("lexicon")?,
            stopwords: path("stopwords")?,
            abusive: path("abusive")?,
            keyword_groups: path("keyword_groups")?,
            keyword: map.get("keyword").cloned().unwrap_or_else(|| "corona".into()),
            country: map.get("country").cloned().unwrap_or_default(),
            vocab_size: parse_value(map, "vocab_size", 2000)?,
            eta: parse_value(map, "eta", 0.1)?,
            epochs: parse_value(map, "epochs", 100)?,
            buckets,
            test_size: parse_value(map, "test_size", 70)?,
            seed: parse_value(map, "seed", 42)?,
            out: map
                .get("out")
                .map(|o| base_dir.join(o))
                .unwrap_or_else(|| base_dir.join("out")),
            lowess_fraction: parse_value(map, "lowess_fraction", 2.0 / 3.0)?,
            lowess_iterations: parse_value(map, "lowess_iterations", 0)?,
            top_k: parse_value(map, "top_k", 50)?,
            min_freq: parse_value(map, "min_freq", 2)?,
        })
    }

    /// Checks every invariant that can be checked without reading data.
    pub fn validate(&self) -> Result<()> {
        if self.corpus.is_empty() {
            return Err(Error::Config("no corpus files given".into()));
        }
        let inputs = self
            .corpus
            .iter()
            .chain([&self.lexicon, &self.stopwords, &self.abusive, &self.keyword_groups]);
        for p in inputs {
            if !p.is_file() {
                return Err(Error::Config(format!("input file not found: {}", p.display())));
            }
        }
        if self.keyword.trim().is_empty() {
            return Err(Error::Config("keyword must not be empty".into()));
        }
        if self.buckets.is_empty() || self.buckets[0] == 0 || self.buckets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("buckets must be positive and strictly increasing".into()));
        }
        if self.test_size == 0 || !self.test_size.is_multiple_of(2) {
            return Err(Error::Config("test_size must be positive and even".into()));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::Config("eta must be finite and non-negative".into()));
        }
        if self.epochs == 0 || self.vocab_size == 0 || self.top_k == 0 || self.min_freq == 0 {
            return Err(Error::Config(
                "epochs, vocab_size, top_k and min_freq must be at least 1".into(),
            ));
        }
        if !(self.lowess_fraction > 0.0 && self.lowess_fraction <= 1.0) {
            return Err(Error::Config("lowess_fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Reads `group = phrase, phrase, ...` lines (phrases may contain spaces). The `abusew` group defaults to the
/// abusive word list when the file does not define it.
pub fn parse_keyword_groups(text: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut groups = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, words) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("keyword groups line {}: expected group = words", i + 1)))?;
        let words = words
            .split(',')
            .map(|w| w.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        groups.insert(name.trim().to_lowercase(), words);
    }
    Ok(groups)
}

/// Everything loaded from the configured inputs before any file is written.
pub struct Resources {
    pub lexicon: SentimentLexicon,
    pub stopwords: HashSet<String>,
    pub masker: AbusiveMasker,
    pub groups: KeywordGroups,
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl Resources {
    pub fn load(config: &RunConfig) -> Result<Self> {
        let lexicon = lexicon::load_lexicon(read_file(&config.lexicon)?.as_bytes())?;
        let stopwords = load_word_list(read_file(&config.stopwords)?.as_bytes())?
            .into_iter()
            .collect();
        let abusive = load_word_list(read_file(&config.abusive)?.as_bytes())?;
        let masker = AbusiveMasker::new(&abusive)
            .map_err(|_| Error::Config(format!("{}: abusive word list is empty", config.abusive.display())))?;
        let mut groups = parse_keyword_groups(&read_file(&config.keyword_groups)?)?;
        groups.entry("abusew".into()).or_insert(abusive);
        Ok(Resources {
            lexicon,
            stopwords,
            masker,
            groups: KeywordGroups::new(&groups)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanedTweet {
    pub record: TweetRecord,
    pub masked_text: String,
    pub replacements: usize,
    pub entities: EntitySet,
    /// Stopword-free tokens of the masked text.
    pub document: Document,
    pub stems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTweet {
    #[serde(flatten)]
    pub cleaned: CleanedTweet,
    pub sentiment: SentimentScore,
    pub emotions: EmotionProfile,
    pub label: Option<ClassLabel>,
}

impl ScoredTweet {
    pub fn fear_dominant(&self) -> bool {
        self.emotions.dominant == Some(Emotion::Fear)
    }

    fn stemmed_document(&self) -> Document {
        Document {
            record_id: self.cleaned.record.id.clone(),
            tokens: self.cleaned.stems.clone(),
            char_length: self.cleaned.document.char_length,
        }
    }
}

pub fn clean_record(record: TweetRecord, resources: &Resources, seed: u64) -> CleanedTweet {
    let entities = extract_entities(&record.text, &resources.groups);
    let masked = resources.masker.mask(&record.text, seed);
    let tokens = remove_stopwords(&crate::text::tokenize(&masked.text), &resources.stopwords);
    let document = Document {
        record_id: record.id.clone(),
        tokens,
        char_length: record.text.chars().count(),
    };
    let stems = document.tokens.iter().map(|t| crate::porter::stem(t)).collect();
    CleanedTweet {
        record,
        masked_text: masked.text,
        replacements: masked.replacements,
        entities,
        document,
        stems,
    }
}

pub fn score_tweet(cleaned: CleanedTweet, lexicon: &SentimentLexicon) -> ScoredTweet {
    let sentiment = valence_score(&cleaned.document, lexicon);
    let emotions = emotion_profile(&cleaned.document, lexicon);
    let label = label_binary(&sentiment);
    ScoredTweet {
        cleaned,
        sentiment,
        emotions,
        label,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub rows: usize,
    pub sha256: String,
    pub stage: Stage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub manifest: Vec<ManifestEntry>,
    pub completed: Vec<Stage>,
}

/// Process exit status for a pipeline error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::MissingColumn { .. } | Error::Lexicon { .. } | Error::Csv(_) | Error::Split { .. } => 3,
        _ => 4,
    }
}

struct Emitter<'a> {
    out: &'a Path,
    entries: Vec<ManifestEntry>,
}

impl Emitter<'_> {
    fn emit(&mut self, stage: Stage, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<usize>) -> Result<()> {
        let mut bytes = Vec::new();
        let rows = write(&mut bytes)?;
        let path = self.out.join(name);
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            rows,
            sha256: hex::encode(Sha256::digest(&bytes)),
            stage,
        });
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<ManifestEntry>> {
        self.entries
            .sort_by(|a, b| a.stage.cmp(&b.stage).then_with(|| a.path.cmp(&b.path)));
        let json = serde_json::to_string_pretty(&self.entries)? + "\n";
        let path = self.out.join(MANIFEST_FILE);
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(self.entries)
    }
}

fn write_jsonl<T: Serialize>(items: &[T], buf: &mut Vec<u8>) -> Result<usize> {
    for item in items {
        serde_json::to_writer(&mut *buf, item)?;
        buf.push(b'\n');
    }
    Ok(items.len())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut items = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            items.push(serde_json::from_str(&line)?);
        }
    }
    Ok(items)
}

fn read_manifest(out: &Path) -> Vec<ManifestEntry> {
    fs::read_to_string(out.join(MANIFEST_FILE))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default()
}

fn write_json<T: Serialize>(value: &T, buf: &mut Vec<u8>) -> Result<usize> {
    serde_json::to_writer_pretty(&mut *buf, value)?;
    buf.push(b'\n');
    Ok(1)
}

/// Runs the requested tasks in dependency order.
///
/// Configuration and all auxiliary inputs are validated and loaded before
/// the output directory is touched, so a config error writes nothing. On a
/// later failure the manifest still lists what was completed.
pub fn run_pipeline(config: &RunConfig, tasks: &[Task]) -> Result<RunOutcome> {
    config.validate()?;
    let resources = Resources::load(config).map_err(|e| match e {
        Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
        other => other,
    })?;

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let mut emitter = Emitter {
        out: &config.out,
        entries: read_manifest(&config.out),
    };
    let mut completed = Vec::new();
    let result = run_tasks(config, &resources, tasks, &mut emitter, &mut completed);
    let manifest = emitter.finish()?;
    result.map(|()| RunOutcome { manifest, completed })
}

fn run_tasks(
    config: &RunConfig,
    resources: &Resources,
    tasks: &[Task],
    emitter: &mut Emitter<'_>,
    completed: &mut Vec<Stage>,
) -> Result<()> {
    let wants = |t: Task| tasks.contains(&t);
    let out = config.out.clone();

    if wants(Task::Ingest) {
        let mut records = Vec::new();
        for path in &config.corpus {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            let (mut parsed, report) = parse_tweet_csv(BufReader::new(file), &Schema::default())?;
            log::info!(
                "{}: {} rows accepted, {} rejected",
                path.display(),
                report.accepted,
                report.total_rejected()
            );
            records.append(&mut parsed);
        }
        let filtered = filter_corpus(&records, &config.keyword, &config.country);
        log::info!("corpus filter kept {} of {} records", filtered.len(), records.len());
        emitter.emit(Stage::Ingest, CORPUS_FILE, |buf| write_jsonl(&filtered, buf))?;
        completed.push(Stage::Ingest);
    }

    if wants(Task::Clean) {
        let records: Vec<TweetRecord> = read_jsonl(&out.join(CORPUS_FILE))?;
        let cleaned: Vec<CleanedTweet> = records
            .into_iter()
            .enumerate()
            .map(|(i, r)| clean_record(r, resources, config.seed.wrapping_add(i as u64)))
            .collect();
        emitter.emit(Stage::Clean, CLEANED_FILE, |buf| write_jsonl(&cleaned, buf))?;
        completed.push(Stage::Clean);
    }

    if wants(Task::Score) {
        let cleaned: Vec<CleanedTweet> = read_jsonl(&out.join(CLEANED_FILE))?;
        let scored: Vec<ScoredTweet> = cleaned
            .into_iter()
            .map(|c| score_tweet(c, &resources.lexicon))
            .collect();
        emitter.emit(Stage::Score, SCORED_FILE, |buf| write_jsonl(&scored, buf))?;
        completed.push(Stage::Score);
    }

    let report_tasks = [Task::Ngrams, Task::Summarize, Task::FearCurve, Task::GeoMap];
    let classify_tasks = [Task::TrainNb, Task::TrainLr, Task::Evaluate];
    let needs_scored = report_tasks.iter().chain(&classify_tasks).any(|t| wants(*t));
    if !needs_scored {
        return Ok(());
    }
    let scored: Vec<ScoredTweet> = read_jsonl(&out.join(SCORED_FILE))?;

    if report_tasks.iter().any(|t| wants(*t)) {
        emit_reports(config, &scored, tasks, emitter)?;
        completed.push(Stage::Reports);
    }
    if classify_tasks.iter().any(|t| wants(*t)) {
        emit_classification(config, &scored, tasks, emitter)?;
        completed.push(Stage::Classify);
    }
    Ok(())
}

fn emit_reports(config: &RunConfig, scored: &[ScoredTweet], tasks: &[Task], emitter: &mut Emitter<'_>) -> Result<()> {
    let stage = Stage::Reports;
    if tasks.contains(&Task::Ngrams) {
        let docs: Vec<Document> = scored.iter().map(|s| s.cleaned.document.clone()).collect();
        let mut tables = Vec::new();
        for n in 1..=MAX_NGRAM {
            tables.push((n, top_ngrams(&docs, n, config.top_k, config.min_freq)?));
        }
        emitter.emit(stage, "ngrams.csv", |buf| reports::write_ngrams_csv(&tables, buf))?;
        let cloud = reports::wordcloud_export(&docs, config.top_k)?;
        emitter.emit(stage, "wordcloud.csv", |buf| {
            reports::write_frequency_csv(["word", "frequency"], &cloud, buf)
        })?;
    }
    if tasks.contains(&Task::Summarize) {
        let rows = reports::source_feature_summary(scored.iter().map(|s| (&s.cleaned.record, &s.cleaned.entities)));
        emitter.emit(stage, "source_summary.csv", |buf| {
            reports::write_source_summary_csv(&rows, buf)
        })?;
        let ratios = reports::relative_ratio_summary(&rows);
        emitter.emit(stage, "source_ratios.csv", |buf| reports::write_ratio_csv(&ratios, buf))?;

        type Extract = fn(&ScoredTweet) -> Vec<String>;
        let tables: [(&str, &str, Extract); 5] = [
            ("freq_mentions.csv", "mention", |s| s.cleaned.entities.mentions.clone()),
            ("freq_hashtags.csv", "hashtag", |s| s.cleaned.entities.hashtags.clone()),
            ("freq_tagged_locations.csv", "tagged_location", |s| {
                vec![s.cleaned.record.tagged_location.clone()]
            }),
            ("freq_stated_locations.csv", "stated_location", |s| {
                vec![s.cleaned.record.stated_location.clone()]
            }),
            ("freq_sources.csv", "source", |s| vec![s.cleaned.record.source.clone()]),
        ];
        for (file, column, extract) in tables {
            let ranked = reports::frequency_table(scored.iter().flat_map(extract), config.top_k)?;
            emitter.emit(stage, file, |buf| {
                reports::write_frequency_csv([column, "frequency"], &ranked, buf)
            })?;
        }
    }
    if tasks.contains(&Task::FearCurve) {
        let points: Vec<_> = scored
            .iter()
            .map(|s| (s.cleaned.record.created_at, s.fear_dominant()))
            .collect();
        let series = reports::fear_curve(&points, config.lowess_fraction, config.lowess_iterations)?;
        emitter.emit(stage, "fear_curve.csv", |buf| {
            reports::write_fear_curve_csv(&series, buf)
        })?;
    }
    if tasks.contains(&Task::GeoMap) {
        let rows = reports::state_sentiment_aggregate(
            scored
                .iter()
                .map(|s| (s.cleaned.record.state.as_str(), s.sentiment.value, s.fear_dominant())),
        );
        emitter.emit(stage, "state_sentiment.csv", |buf| reports::write_state_csv(&rows, buf))?;
    }
    Ok(())
}

fn labeled_documents(scored: &[ScoredTweet]) -> Vec<LabeledDocument> {
    scored
        .iter()
        .filter_map(|s| s.label.map(|l| (s.stemmed_document(), l)))
        .collect()
}

fn lr_data(docs: &[LabeledDocument], vocab: &crate::text::Vocabulary) -> Vec<(FeatureVector, ClassLabel)> {
    docs.iter().map(|(d, l)| (vectorize(d, vocab), *l)).collect()
}

/// Trains both classifiers on `train` and evaluates them on `test`.
pub fn evaluate_bucket(
    train: &[LabeledDocument],
    test: &[LabeledDocument],
    bucket: LengthBucket,
    vocab_size: usize,
    eta: f64,
    epochs: usize,
    seed: u64,
) -> Result<[EvaluationReport; 2]> {
    let train_docs: Vec<Document> = train.iter().map(|(d, _)| d.clone()).collect();
    let vocab = build_vocabulary(&train_docs, vocab_size)?;
    let actuals: Vec<ClassLabel> = test.iter().map(|(_, l)| *l).collect();

    let nb = train_nb(train, &vocab)?;
    let nb_pred: Vec<ClassLabel> = test.iter().map(|(d, _)| nb.predict(d)).collect();

    let (lr, _) = train_lr(&lr_data(train, &vocab), eta, epochs, seed)?;
    let lr_pred = test
        .iter()
        .map(|(d, _)| lr.predict(&vectorize(d, &vocab)).map(|(_, c)| c))
        .collect::<Result<Vec<_>>>()?;

    Ok([
        EvaluationReport::from_predictions("nb", bucket, &nb_pred, &actuals, train.len(), seed)?,
        EvaluationReport::from_predictions("lr", bucket, &lr_pred, &actuals, train.len(), seed)?,
    ])
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_evaluation_csv(reports: &[EvaluationReport], buf: &mut Vec<u8>) -> Result<usize> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(&mut *buf);
    w.write_record([
        "classifier",
        "bucket",
        "tn",
        "fp",
        "fn",
        "tp",
        "accuracy",
        "sensitivity",
        "specificity",
        "train_size",
        "test_size",
        "seed",
    ])?;
    for r in reports {
        w.write_record([
            r.classifier.clone(),
            format!("<{}", r.bucket.max_chars),
            r.matrix.tn.to_string(),
            r.matrix.fp.to_string(),
            r.matrix.fn_.to_string(),
            r.matrix.tp.to_string(),
            r.accuracy.to_string(),
            fmt_opt(r.sensitivity),
            fmt_opt(r.specificity),
            r.train_size.to_string(),
            r.test_size.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv sink>", e))?;
    Ok(reports.len())
}

fn emit_classification(
    config: &RunConfig,
    scored: &[ScoredTweet],
    tasks: &[Task],
    emitter: &mut Emitter<'_>,
) -> Result<()> {
    let stage = Stage::Classify;
    let labeled = labeled_documents(scored);
    if tasks.contains(&Task::TrainNb) || tasks.contains(&Task::TrainLr) {
        let docs: Vec<Document> = labeled.iter().map(|(d, _)| d.clone()).collect();
        let vocab = build_vocabulary(&docs, config.vocab_size)?;
        if tasks.contains(&Task::TrainNb) {
            let model: NbModel = train_nb(&labeled, &vocab)?;
            emitter.emit(stage, "nb_model.json", |buf| write_json(&model, buf))?;
        }
        if tasks.contains(&Task::TrainLr) {
            let (model, trace) = train_lr(&lr_data(&labeled, &vocab), config.eta, config.epochs, config.seed)?;
            let model: LrModel = model.with_vocabulary(vocab.clone());
            emitter.emit(stage, "lr_model.json", |buf| write_json(&model, buf))?;
            emitter.emit(stage, "lr_trace.csv", |buf| {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(&mut *buf);
                w.write_record(["epoch", "mean_loss"])?;
                for (i, l) in trace.epoch_loss.iter().enumerate() {
                    w.write_record([(i + 1).to_string(), l.to_string()])?;
                }
                w.flush().map_err(|e| Error::io("<csv sink>", e))?;
                Ok(trace.epoch_loss.len())
            })?;
        }
    }
    if tasks.contains(&Task::Evaluate) {
        let mut all = Vec::new();
        for &max_chars in &config.buckets {
            let bucket = LengthBucket::new(max_chars)?;
            let (train, test) = balanced_split(&labeled, bucket, config.test_size, config.seed)?;
            let reports = evaluate_bucket(
                &train,
                &test,
                bucket,
                config.vocab_size,
                config.eta,
                config.epochs,
                config.seed,
            )?;
            for r in &reports {
                let name = format!("eval_{}_lt{}.json", r.classifier, max_chars);
                emitter.emit(stage, &name, |buf| write_json(r, buf))?;
            }
            all.extend(reports);
        }
        emitter.emit(stage, "evaluation.csv", |buf| write_evaluation_csv(&all, buf))?;
    }
    Ok(())
}

/// Convenience for callers that only have a config path.
pub fn load_config(path: &Path, overrides: &BTreeMap<String, String>) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut map = parse_config_text(&text)?;
    map.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
    let base = path.parent().unwrap_or(Path::new("."));
    RunConfig::from_map(&map, base)
}

/// Serialises records back to CSV, e.g. to export the filtered corpus.
pub fn export_records_csv(records: &[TweetRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    ingest::write_tweet_csv(records, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_parsing() {
        let map = parse_config_text("# c\ncorpus = a.csv, b.csv\nvocab-size=10\n").unwrap();
        assert_eq!(map["vocab_size"], "10");
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("no equals").is_err());
    }

    #[test]
    fn keyword_group_parsing() {
        let g = parse_keyword_groups("corona = corona, Coronavirus,covid\n# x\nbeer=corona  beer, beer\n").unwrap();
        assert_eq!(g["corona"], vec!["corona", "coronavirus", "covid"]);
        assert_eq!(g["beer"], vec!["corona beer", "beer"]);
        assert!(parse_keyword_groups("oops").is_err());
    }

    #[test]
    fn stage_names() {
        assert_eq!("score".parse::<Stage>().unwrap(), Stage::Score);
        assert!("nope".parse::<Stage>().is_err());
        assert_eq!(Task::for_stages(&[Stage::Ingest]), vec![Task::Ingest]);
        assert_eq!(Task::for_stages(&Stage::ALL).len(), Task::ALL.len());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(
            exit_code(&Error::Lexicon {
                line: 1,
                message: String::new()
            }),
            3
        );
        assert_eq!(exit_code(&Error::Training("x".into())), 4);
    }
}
