//! Multinomial Naive Bayes with Laplace add-one smoothing, scored in log
//! space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{Document, Vocabulary};
use crate::{ClassLabel, NEGATIVE, POSITIVE};

pub const NB_FORMAT: &str = "tweetscope-nb";
pub const NB_FORMAT_VERSION: u32 = 1;

/// Trained model. `log_likelihood[c][w]` is `ln P(word w | class c)` for the
/// class at position `c` of `classes` and vocabulary position `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub format: String,
    pub version: u32,
    pub classes: Vec<ClassLabel>,
    pub log_prior: Vec<f64>,
    pub vocabulary: Vocabulary,
    pub log_likelihood: Vec<Vec<f64>>,
    pub class_token_totals: Vec<u64>,
}

/// Trains on the binary classes `[negative, positive]`.
pub fn train_nb(docs: &[(Document, ClassLabel)], vocab: &Vocabulary) -> Result<NbModel> {
    train_nb_with_classes(docs, vocab, &[NEGATIVE, POSITIVE])
}

/// Trains over an explicit class order. Every class needs at least one
/// document; tokens outside `vocab` are not counted.
pub fn train_nb_with_classes(
    docs: &[(Document, ClassLabel)],
    vocab: &Vocabulary,
    classes: &[ClassLabel],
) -> Result<NbModel> {
    if vocab.is_empty() {
        return Err(Error::Training("vocabulary is empty".into()));
    }
    if classes.is_empty() {
        return Err(Error::Training("no classes declared".into()));
    }
    let slot_of = |label: ClassLabel| classes.iter().position(|c| *c == label);

    let mut doc_counts = vec![0u64; classes.len()];
    let mut word_counts = vec![vec![0u64; vocab.len()]; classes.len()];
    for (doc, label) in docs {
        let slot = slot_of(*label)
            .ok_or_else(|| Error::Training(format!("document labelled with undeclared class {label}")))?;
        doc_counts[slot] += 1;
        for token in &doc.tokens {
            if let Some(w) = vocab.index_of(token) {
                word_counts[slot][w] += 1;
            }
        }
    }
    if let Some(slot) = doc_counts.iter().position(|n| *n == 0) {
        return Err(Error::Training(format!(
            "class {} has no training documents",
            classes[slot]
        )));
    }

    let n_docs = docs.len() as f64;
    let log_prior = doc_counts.iter().map(|n| (*n as f64 / n_docs).ln()).collect();
    let v = vocab.len() as f64;
    let class_token_totals: Vec<u64> = word_counts.iter().map(|row| row.iter().sum()).collect();
    let log_likelihood = word_counts
        .iter()
        .zip(&class_token_totals)
        .map(|(row, total)| {
            let denom = (*total as f64 + v).ln();
            row.iter().map(|c| (*c as f64 + 1.0).ln() - denom).collect()
        })
        .collect();

    Ok(NbModel {
        format: NB_FORMAT.to_string(),
        version: NB_FORMAT_VERSION,
        classes: classes.to_vec(),
        log_prior,
        vocabulary: vocab.clone(),
        log_likelihood,
        class_token_totals,
    })
}

impl NbModel {
    /// Unnormalised log posterior per class, in `classes` order. Every
    /// in-vocabulary token position contributes once.
    pub fn log_posterior(&self, doc: &Document) -> Vec<(ClassLabel, f64)> {
        let positions: Vec<usize> = doc.tokens.iter().filter_map(|t| self.vocabulary.index_of(t)).collect();
        self.classes
            .iter()
            .enumerate()
            .map(|(c, label)| {
                let row = &self.log_likelihood[c];
                let score = positions.iter().fold(self.log_prior[c], |acc, w| acc + row[*w]);
                (*label, score)
            })
            .collect()
    }

    /// Argmax of [`Self::log_posterior`]; ties go to the earlier class.
    pub fn predict(&self, doc: &Document) -> ClassLabel {
        let mut best = (self.classes[0], f64::NEG_INFINITY);
        for (label, score) in self.log_posterior(doc) {
            if score > best.1 {
                best = (label, score);
            }
        }
        best.0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: NbModel = serde_json::from_str(json)?;
        if model.format != NB_FORMAT || model.version != NB_FORMAT_VERSION {
            return Err(Error::Argument(format!(
                "unsupported model format {} v{}",
                model.format, model.version
            )));
        }
        let shape_ok = model.log_prior.len() == model.classes.len()
            && model.log_likelihood.len() == model.classes.len()
            && model
                .log_likelihood
                .iter()
                .all(|row| row.len() == model.vocabulary.len());
        if !shape_ok || model.classes.is_empty() {
            return Err(Error::Argument("model tables do not match classes/vocabulary".into()));
        }
        Ok(model)
    }
}

pub fn log_posterior(model: &NbModel, doc: &Document) -> Vec<(ClassLabel, f64)> {
    model.log_posterior(doc)
}

pub fn predict_nb(model: &NbModel, doc: &Document) -> ClassLabel {
    model.predict(doc)
}
