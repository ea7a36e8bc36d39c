//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use regex::Regex;
use tweetscope::eval::{balanced_split, metrics, ConfusionMatrix, LabeledDocument, LengthBucket};
use tweetscope::ingest::{load_word_list, parse_tweet_csv, AbusiveMasker, Schema, MASK_PREFIX};
use tweetscope::lr::{gradient, loss, sigmoid, train_lr, FeatureVector};
use tweetscope::nb::train_nb;
use tweetscope::pipeline::evaluate_bucket;
use tweetscope::text::{build_vocabulary, Document, Vocabulary};
use tweetscope::{lowess, porter, ClassLabel, NEGATIVE, POSITIVE};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    check(elapsed < budget, format!("took {elapsed:?}, budget {budget:?}"))
}

// 1. Confusion-matrix arithmetic against the published tables.
fn metric_reproduction() -> Outcome {
    // (label, tn, fp, fn, tp, printed accuracy, printed sensitivity, printed specificity)
    let tables = [
        ("NB short", 34, 1, 5, 30, "0.9143", 0.86, 0.97),
        ("NB long", 34, 1, 29, 6, "0.5714", 0.17, 0.97),
        ("LR short", 30, 5, 13, 22, "0.7429", 0.63, 0.86),
        ("LR long", 21, 14, 19, 16, "0.52", 0.46, 0.60),
    ];
    let mut failures = Vec::new();
    for (label, tn, fp, fn_, tp, acc_text, sens, spec) in tables {
        let m = metrics(&ConfusionMatrix::new(tn, fp, fn_, tp)).map_err(|e| e.to_string())?;
        // "Exactly" as printed: the value must round to the printed digits.
        let decimals = acc_text.split('.').nth(1).map_or(0, str::len) as i32;
        let printed: f64 = acc_text.parse().unwrap();
        let half_ulp = 0.5 * 10f64.powi(-decimals);
        if (m.accuracy - printed).abs() > half_ulp + 1e-12 {
            failures.push(format!(
                "{label}: accuracy {:.6} does not print as {acc_text}",
                m.accuracy
            ));
        }
        if (m.sensitivity - sens).abs() > 0.005 + 1e-12 {
            failures.push(format!("{label}: sensitivity {:.4} vs {sens}", m.sensitivity));
        }
        if (m.specificity - spec).abs() > 0.005 + 1e-12 {
            failures.push(format!("{label}: specificity {:.4} vs {spec}", m.specificity));
        }
    }
    if failures.is_empty() {
        Ok("4 tables, accuracies and rates match".into())
    } else {
        Err(failures.join("; "))
    }
}

fn doc(id: usize, words: &[&str]) -> Document {
    Document::from_tokens(format!("d{id}"), words, words.iter().map(|w| w.len() + 1).sum())
}

// 2. Log-space NB prediction agrees with brute-force products of raw
//    smoothed probabilities.
fn nb_oracle() -> Outcome {
    let words = ["alpha", "beta", "gamma"];
    let training: Vec<(Document, ClassLabel)> = [
        (&["alpha", "alpha", "beta"][..], NEGATIVE),
        (&["alpha", "gamma"][..], NEGATIVE),
        (&["alpha"][..], NEGATIVE),
        (&["beta", "gamma", "gamma"][..], POSITIVE),
        (&["gamma", "beta"][..], POSITIVE),
        (&["beta", "alpha", "gamma", "gamma"][..], POSITIVE),
        (&["gamma"][..], POSITIVE),
    ]
    .iter()
    .enumerate()
    .map(|(i, (w, l))| (doc(i, w), *l))
    .collect();
    let vocab = Vocabulary::from(words.iter().map(|w| w.to_string()).collect::<Vec<_>>());
    let model = train_nb(&training, &vocab).map_err(|e| e.to_string())?;

    // Independent raw-probability model built from the counts directly.
    let mut prior = [0.0f64; 2];
    let mut counts = [[0.0f64; 3]; 2];
    for (d, l) in &training {
        prior[*l as usize] += 1.0;
        for t in &d.tokens {
            counts[*l as usize][words.iter().position(|w| w == t).unwrap()] += 1.0;
        }
    }
    let n_docs = training.len() as f64;
    let likelihood = |c: usize, w: usize| (counts[c][w] + 1.0) / (counts[c].iter().sum::<f64>() + 3.0);

    let mut docs: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier = docs.clone();
    for _ in 0..3 {
        frontier = frontier
            .iter()
            .flat_map(|d| (0..3).map(move |w| [d.clone(), vec![w]].concat()))
            .collect();
        docs.extend(frontier.clone());
    }
    let mut agree = 0;
    for (i, d) in docs.iter().enumerate() {
        let score = |c: usize| d.iter().fold(prior[c] / n_docs, |p, &w| p * likelihood(c, w));
        let (s0, s1) = (score(0), score(1));
        check(
            (s0 - s1).abs() > 1e-12 * s0.max(s1),
            format!("fixture produced a near-tie on document {d:?}"),
        )?;
        let expected = if s1 > s0 { POSITIVE } else { NEGATIVE };
        let tokens: Vec<&str> = d.iter().map(|&w| words[w]).collect();
        if model.predict(&doc(i, &tokens)) == expected {
            agree += 1;
        }
    }
    check(agree == docs.len(), format!("{agree}/{} documents agree", docs.len()))?;
    Ok(format!("{} documents, 100% agreement", docs.len()))
}

fn random_corpus(seed: u64, n: usize, vocab_words: usize) -> Vec<(Document, ClassLabel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = (i % 2) as ClassLabel;
            let len = rng.random_range(1..12);
            let tokens: Vec<String> = (0..len)
                .map(|_| {
                    let w = if label == POSITIVE {
                        rng.random_range(0..vocab_words)
                    } else {
                        rng.random_range(0..vocab_words) / 2
                    };
                    format!("w{w}")
                })
                .collect();
            (Document::from_tokens(format!("r{i}"), &tokens, len * 4), label)
        })
        .collect()
}

// 3. Every class-conditional distribution and the prior are normalised.
fn nb_normalization() -> Outcome {
    let mut models = 0;
    for (seed, size) in [(1, 40), (2, 200), (3, 1000)] {
        for n in [20, 200] {
            let corpus = random_corpus(seed, n, size);
            let docs: Vec<Document> = corpus.iter().map(|(d, _)| d.clone()).collect();
            let vocab = build_vocabulary(&docs, size).map_err(|e| e.to_string())?;
            let model = train_nb(&corpus, &vocab).map_err(|e| e.to_string())?;
            for (c, row) in model.log_likelihood.iter().enumerate() {
                let total: f64 = row.iter().map(|l| l.exp()).sum();
                check(
                    (total - 1.0).abs() < 1e-9,
                    format!("class {c} likelihoods sum to {total}"),
                )?;
            }
            let prior: f64 = model.log_prior.iter().map(|l| l.exp()).sum();
            check((prior - 1.0).abs() < 1e-12, format!("priors sum to {prior}"))?;
            models += 1;
        }
    }
    Ok(format!("{models} models normalised"))
}

fn total_loss(w: &[f64], b: f64, x: &FeatureVector, y: ClassLabel) -> f64 {
    let z: f64 = w.iter().zip(&x.values).map(|(a, b)| a * b).sum::<f64>() + b;
    loss(sigmoid(z), y).unwrap()
}

// 4. Analytic gradient against central finite differences.
fn lr_gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let w: Vec<f64> = (0..5).map(|_| normal.sample(&mut rng)).collect();
        let b = normal.sample(&mut rng);
        let x = FeatureVector::new((0..5).map(|_| normal.sample(&mut rng)).collect());
        let y: ClassLabel = rng.random_range(0..2);
        let (gw, gb) = gradient(&w, b, &x, y).map_err(|e| e.to_string())?;
        let mut analytic = gw.clone();
        analytic.push(gb);
        for (k, a) in analytic.iter().enumerate() {
            let numeric = if k < 5 {
                let (mut up, mut down) = (w.clone(), w.clone());
                up[k] += h;
                down[k] -= h;
                (total_loss(&up, b, &x, y) - total_loss(&down, b, &x, y)) / (2.0 * h)
            } else {
                (total_loss(&w, b + h, &x, y) - total_loss(&w, b - h, &x, y)) / (2.0 * h)
            };
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    check(worst < 1e-6, format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.2e}"))
}

// 5. SGD converges on separable data with a monotone early loss trace.
fn lr_convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let truth = [1.5, -2.0, 0.5, 1.0, -0.75];
    let mut data = Vec::new();
    while data.len() < 200 {
        let x: Vec<f64> = (0..5).map(|_| normal.sample(&mut rng)).collect();
        let margin: f64 = x.iter().zip(truth).map(|(a, b)| a * b).sum::<f64>() + 0.25;
        if margin.abs() < 0.1 {
            continue;
        }
        data.push((FeatureVector::new(x), if margin > 0.0 { POSITIVE } else { NEGATIVE }));
    }
    let (model, trace) = train_lr(&data, 0.5, 200, 11).map_err(|e| e.to_string())?;
    let correct = data
        .iter()
        .filter(|(x, y)| model.predict(x).map(|(_, c)| c == *y).unwrap_or(false))
        .count();
    let accuracy = correct as f64 / data.len() as f64;
    check(accuracy >= 0.95, format!("training accuracy {accuracy}"))?;
    let early = &trace.epoch_loss[..10];
    check(
        early.windows(2).all(|w| w[1] < w[0]),
        format!("loss not strictly decreasing over first 10 epochs: {early:?}"),
    )?;
    Ok(format!(
        "training accuracy {accuracy:.3}, final loss {:.4}",
        model.final_mean_loss
    ))
}

/// Documents whose per-token label signal weakens as they grow: each token
/// comes from the document's class pool with probability
/// `0.5 + 0.45 * 3 / n`, otherwise from the opposite pool.
fn diluted_corpus(seed: u64, per_class_and_length: usize) -> Vec<LabeledDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Vec::new();
    let mut id = 0;
    for label in [NEGATIVE, POSITIVE] {
        for long in [false, true] {
            for _ in 0..per_class_and_length {
                let n: usize = if long {
                    rng.random_range(12..=16)
                } else {
                    rng.random_range(3..=8)
                };
                let p_own = 0.5 + 0.45 * 3.0 / n as f64;
                let tokens: Vec<String> = (0..n)
                    .map(|_| {
                        let own = rng.random_bool(p_own.min(1.0));
                        let pool = if own == (label == POSITIVE) { "pos" } else { "neg" };
                        format!("{pool}{:03}", rng.random_range(0..40))
                    })
                    .collect();
                let chars = tokens.iter().map(|t| t.len()).sum::<usize>() + tokens.len() - 1;
                corpus.push((Document::from_tokens(format!("g{id}"), &tokens, chars), label));
                id += 1;
            }
        }
    }
    corpus
}

// 6. Accuracy drops from the short bucket to the (nested) long bucket.
fn length_degradation() -> Outcome {
    let (short, long) = (LengthBucket::new(77).unwrap(), LengthBucket::new(120).unwrap());
    let mut wins = [0usize; 2];
    let mut detail = Vec::new();
    for seed in 1..=5u64 {
        let corpus = diluted_corpus(seed, 300);
        let mut acc = [[0.0; 2]; 2];
        for (b, bucket) in [short, long].into_iter().enumerate() {
            let (train, test) = balanced_split(&corpus, bucket, 70, seed).map_err(|e| e.to_string())?;
            let reports = evaluate_bucket(&train, &test, bucket, 200, 0.1, 20, seed).map_err(|e| e.to_string())?;
            for (c, r) in reports.iter().enumerate() {
                acc[c][b] = r.accuracy;
            }
        }
        for c in 0..2 {
            if acc[c][1] < acc[c][0] {
                wins[c] += 1;
            }
        }
        detail.push(format!(
            "seed {seed}: nb {:.3}->{:.3}, lr {:.3}->{:.3}",
            acc[0][0], acc[0][1], acc[1][0], acc[1][1]
        ));
    }
    check(
        wins == [5, 5],
        format!("sign test nb {}/5, lr {}/5 ({})", wins[0], wins[1], detail.join("; ")),
    )?;
    Ok("nb 5/5, lr 5/5".into())
}

// 7. Porter stemmer against the reference sample.
fn stemmer_sample() -> Outcome {
    let text = std::fs::read_to_string(fixture("porter_sample.tsv")).map_err(|e| e.to_string())?;
    let mut mismatches = Vec::new();
    let mut n = 0;
    for line in text.lines().filter(|l| !l.is_empty()) {
        let (word, expected) = line.split_once('\t').ok_or("bad fixture line")?;
        n += 1;
        let got = porter::stem(word);
        if got != expected {
            mismatches.push(format!("{word}: {got} != {expected}"));
        }
    }
    check(n == 100, format!("sample has {n} words"))?;
    check(mismatches.is_empty(), mismatches.join(", "))?;
    Ok("100/100 stems match".into())
}

// 8. LOWESS exactness on a line and agreement with the reference fits.
fn lowess_agreement() -> Outcome {
    let xs: Vec<f64> = (0..40)
        .map(|i| f64::from(i) * 0.7 + (f64::from(i) * 0.3).sin() * 0.2)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|x| -3.0 + 1.25 * x).collect();
    let fit = lowess::lowess(&xs, &ys, 1.0, 0).map_err(|e| e.to_string())?;
    let linear_err = fit.iter().zip(&ys).map(|(f, y)| (f - y).abs()).fold(0.0, f64::max);
    check(linear_err < 1e-9, format!("collinear max error {linear_err:e}"))?;

    let text = std::fs::read_to_string(fixture("lowess_sine.csv")).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let (x, y) = (col(0), col(1));
    let mut worst = 0.0f64;
    for (iterations, k) in [(0, 2), (2, 3)] {
        let fit = lowess::lowess(&x, &y, 0.25, iterations).map_err(|e| e.to_string())?;
        let dev = fit.iter().zip(col(k)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    check(worst < 1e-8, format!("noisy sine max deviation {worst:e}"))?;
    Ok(format!("linear {linear_err:.1e}, sine {worst:.1e}"))
}

// 9. Two full runs on the synthetic fixture produce identical manifests.
fn pipeline_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_tweetscope");
    let config = fixture("run.conf");
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut manifests = Vec::new();
    let mut timings = Vec::new();
    for run in 0..2 {
        let out = scratch.path().join(format!("run{run}"));
        let start = Instant::now();
        let status = Command::new(bin)
            .arg("run-all")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        check(
            status.status.success(),
            format!("run {run} failed: {}", String::from_utf8_lossy(&status.stderr)),
        )?;
        within_budget(elapsed, Duration::from_secs(5))?;
        timings.push(elapsed);
        manifests.push(std::fs::read(out.join("manifest.json")).map_err(|e| e.to_string())?);
    }
    check(manifests[0] == manifests[1], "manifests differ between runs")?;
    let entries: Vec<serde_json::Value> = serde_json::from_slice(&manifests[0]).map_err(|e| e.to_string())?;
    Ok(format!(
        "{} manifest entries identical, runs {:?} / {:?}",
        entries.len(),
        timings[0],
        timings[1]
    ))
}

// 10. No abusive word survives masking and every mask has the fixed shape.
fn masking_safety() -> Outcome {
    let abusive = load_word_list(std::fs::read_to_string(fixture("abusive.txt")).unwrap().as_bytes())
        .map_err(|e| e.to_string())?;
    let masker = AbusiveMasker::new(&abusive).map_err(|e| e.to_string())?;
    let scan = Regex::new(&format!(r"(?i)\b(?:{})\b", abusive.join("|"))).unwrap();
    let token = Regex::new(&format!(r"{MASK_PREFIX}[0-9]{{4}}")).unwrap();
    let exact = Regex::new(&format!(r"^{MASK_PREFIX}[0-9]{{4}}$")).unwrap();
    let mut masked_total = 0;
    for name in ["synthetic.csv", "small.csv", "two_rows.csv"] {
        let file = std::fs::File::open(fixture(name)).map_err(|e| e.to_string())?;
        let (records, _) = parse_tweet_csv(file, &Schema::default()).map_err(|e| e.to_string())?;
        for (i, r) in records.iter().enumerate() {
            let before = scan.find_iter(&r.text).count();
            let masked = masker.mask(&r.text, 1000 + i as u64);
            check(
                !scan.is_match(&masked.text),
                format!("{}: abusive word left in `{}`", r.id, masked.text),
            )?;
            check(masked.replacements == before, format!("{}: replacement count", r.id))?;
            let tokens: Vec<&str> = masked
                .text
                .split(|c: char| !c.is_alphanumeric())
                .filter(|t| t.starts_with(MASK_PREFIX))
                .collect();
            check(
                tokens.len() == before,
                format!("{}: {} mask tokens for {before} words", r.id, tokens.len()),
            )?;
            check(
                tokens.iter().all(|t| exact.is_match(t)),
                format!("{}: malformed mask", r.id),
            )?;
            check(
                token.find_iter(&masked.text).count() == before,
                format!("{}: mask count", r.id),
            )?;
            masked_total += before;
        }
    }
    check(masked_total > 0, "fixtures contain no abusive words")?;
    Ok(format!("{masked_total} words masked, none left"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 10] = [
        ("metric reproduction", metric_reproduction, Duration::from_secs(1)),
        ("nb brute-force oracle", nb_oracle, Duration::from_secs(5)),
        ("nb normalization", nb_normalization, Duration::from_secs(5)),
        ("lr gradient check", lr_gradient_check, Duration::from_secs(5)),
        ("lr convergence", lr_convergence, Duration::from_secs(10)),
        ("length degradation", length_degradation, Duration::from_secs(60)),
        ("porter sample", stemmer_sample, Duration::from_secs(1)),
        ("lowess agreement", lowess_agreement, Duration::from_secs(1)),
        ("pipeline determinism", pipeline_determinism, Duration::from_secs(10)),
        ("masking safety", masking_safety, Duration::from_secs(5)),
    ];
    let mut failed = BTreeMap::new();
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run().and_then(|msg| within_budget(start.elapsed(), budget).map(|()| msg));
        let elapsed = start.elapsed();
        match result {
            Ok(msg) => println!("criterion {:>2} PASS  {name} ({elapsed:.2?}): {msg}", i + 1),
            Err(msg) => {
                println!("criterion {:>2} FAIL  {name} ({elapsed:.2?}): {msg}", i + 1);
                failed.insert(i + 1, name);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
