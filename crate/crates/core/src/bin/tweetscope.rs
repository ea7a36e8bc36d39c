use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tweetscope::pipeline::{self, RunConfig, Stage, Task};
use tweetscope::Error;

/// Batch analytics over tweet corpora.
///
/// Settings come from a flat `key = value` config file (`--config`); every
/// key can also be given as a flag of the same name, which takes precedence.
/// Exit status: 0 success, 2 configuration error, 3 data error, 4 stage failure.
#[derive(Parser, Debug)]
#[command(name = "tweetscope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse the corpus CSVs, filter by keyword and country, write corpus.jsonl.
    Ingest(Settings),
    /// Mask abusive words, extract entities, tokenize, write cleaned.jsonl.
    Clean(Settings),
    /// Top n-gram tables (n = 1..4) and the word-cloud export.
    Ngrams(Settings),
    /// Lexicon valence, emotion profiles and binary labels, write scored.jsonl.
    Sentiment(Settings),
    /// Per-source feature summary, relative ratios and frequency tables.
    Summarize(Settings),
    /// Daily fear-dominant counts, increments and LOWESS curve.
    Fearcurve(Settings),
    /// Per-state sentiment aggregate.
    Geomap(Settings),
    /// Train the Naive Bayes model on all labelled tweets.
    TrainNb(Settings),
    /// Train the logistic regression model on all labelled tweets.
    TrainLr(Settings),
    /// Balanced, length-bucketed evaluation of both classifiers.
    Evaluate(Settings),
    /// Run every stage in order (optionally restricted with --stages).
    RunAll(Settings),
}

#[derive(Args, Debug, Default)]
struct Settings {
    /// Config file with `key = value` lines. Relative paths inside it resolve against its
    /// directory; paths passed as flags resolve against the working directory.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for masking digits, splits and SGD shuffles (default 42).
    #[arg(long)]
    seed: Option<String>,
    /// Output directory (default `out` next to the config file).
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated stages for run-all: ingest,clean,score,reports,classify.
    #[arg(long)]
    stages: Option<String>,
    /// Comma-separated corpus CSV files.
    #[arg(long)]
    corpus: Option<String>,
    /// Lexicon TSV (word, category, flag).
    #[arg(long)]
    lexicon: Option<String>,
    /// Stopword list, one per line.
    #[arg(long)]
    stopwords: Option<String>,
    /// Abusive word list, one per line.
    #[arg(long)]
    abusive: Option<String>,
    /// Keyword groups file (`group = word, word`).
    #[arg(long, alias = "keyword_groups")]
    keyword_groups: Option<String>,
    /// Corpus filter keyword (default `corona`).
    #[arg(long)]
    keyword: Option<String>,
    /// Corpus filter country; empty keeps every country.
    #[arg(long)]
    country: Option<String>,
    /// Maximum vocabulary size for the classifiers.
    #[arg(long, alias = "vocab_size")]
    vocab_size: Option<String>,
    /// Logistic regression learning rate.
    #[arg(long)]
    eta: Option<String>,
    /// Logistic regression epochs.
    #[arg(long)]
    epochs: Option<String>,
    /// Comma-separated, strictly increasing length bounds (characters).
    #[arg(long)]
    buckets: Option<String>,
    /// Balanced test-set size per bucket (even).
    #[arg(long, alias = "test_size")]
    test_size: Option<String>,
    /// LOWESS smoothing fraction in (0, 1].
    #[arg(long, alias = "lowess_fraction")]
    lowess_fraction: Option<String>,
    /// LOWESS robustness iterations.
    #[arg(long, alias = "lowess_iterations")]
    lowess_iterations: Option<String>,
    /// Rows kept in ranked tables.
    #[arg(long, alias = "top_k")]
    top_k: Option<String>,
    /// Minimum n-gram frequency.
    #[arg(long, alias = "min_freq")]
    min_freq: Option<String>,
}

const PATH_KEYS: [&str; 6] = ["out", "corpus", "lexicon", "stopwords", "abusive", "keyword_groups"];

impl Settings {
    fn overrides(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("seed", &self.seed),
            ("out", &self.out),
            ("corpus", &self.corpus),
            ("lexicon", &self.lexicon),
            ("stopwords", &self.stopwords),
            ("abusive", &self.abusive),
            ("keyword_groups", &self.keyword_groups),
            ("keyword", &self.keyword),
            ("country", &self.country),
            ("vocab_size", &self.vocab_size),
            ("eta", &self.eta),
            ("epochs", &self.epochs),
            ("buckets", &self.buckets),
            ("test_size", &self.test_size),
            ("lowess_fraction", &self.lowess_fraction),
            ("lowess_iterations", &self.lowess_iterations),
            ("top_k", &self.top_k),
            ("min_freq", &self.min_freq),
        ];
        // Paths given on the command line are relative to the working
        // directory, not to the config file.
        let cwd = std::env::current_dir().unwrap_or_default();
        let absolute = |list: &str| {
            list.split(',')
                .map(|p| cwd.join(p.trim()).display().to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        pairs
            .into_iter()
            .filter_map(|(k, v)| {
                let v = v.as_ref()?;
                let value = if PATH_KEYS.contains(&k) { absolute(v) } else { v.clone() };
                Some((k.to_string(), value))
            })
            .collect()
    }

    fn config(&self) -> Result<RunConfig, Error> {
        let overrides = self.overrides();
        match &self.config {
            Some(path) => pipeline::load_config(path, &overrides),
            None => RunConfig::from_map(&overrides, Path::new(".")),
        }
    }

    fn stages(&self) -> Result<Vec<Stage>, Error> {
        match &self.stages {
            None => Ok(Stage::ALL.to_vec()),
            Some(list) => list
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(str::parse)
                .collect(),
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    let (settings, tasks) = match command {
        Command::Ingest(s) => (s, vec![Task::Ingest]),
        Command::Clean(s) => (s, vec![Task::Clean]),
        Command::Ngrams(s) => (s, vec![Task::Ngrams]),
        Command::Sentiment(s) => (s, vec![Task::Score]),
        Command::Summarize(s) => (s, vec![Task::Summarize]),
        Command::Fearcurve(s) => (s, vec![Task::FearCurve]),
        Command::Geomap(s) => (s, vec![Task::GeoMap]),
        Command::TrainNb(s) => (s, vec![Task::TrainNb]),
        Command::TrainLr(s) => (s, vec![Task::TrainLr]),
        Command::Evaluate(s) => (s, vec![Task::Evaluate]),
        Command::RunAll(s) => {
            let stages = s.stages()?;
            (s, Task::for_stages(&stages))
        }
    };
    let config = settings.config()?;
    let outcome = pipeline::run_pipeline(&config, &tasks)?;
    for entry in &outcome.manifest {
        println!("{:<9} {:>7} rows  {}", entry.stage.as_str(), entry.rows, entry.path);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(pipeline::exit_code(&err) as u8)
        }
    }
}
