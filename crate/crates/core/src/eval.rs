//! Length-bucketed balanced splits and confusion-matrix metrics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::Document;
use crate::{ClassLabel, NEGATIVE, POSITIVE};

/// Documents strictly shorter than `max_chars` characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBucket {
    pub max_chars: usize,
}

impl LengthBucket {
    pub fn new(max_chars: usize) -> Result<Self> {
        if max_chars == 0 {
            return Err(Error::Argument("bucket bound must be positive".into()));
        }
        Ok(LengthBucket { max_chars })
    }

    pub fn contains(&self, doc: &Document) -> bool {
        doc.char_length < self.max_chars
    }
}

pub const DEFAULT_BUCKETS: [usize; 2] = [77, 120];

pub type LabeledDocument = (Document, ClassLabel);

/// Test set of `test_size / 2` documents per class drawn from the bucket,
/// and a class-balanced training set from what remains (the larger class
/// is downsampled). Both sets are fully determined by the inputs and `seed`.
pub fn balanced_split(
    corpus: &[LabeledDocument],
    bucket: LengthBucket,
    test_size: usize,
    seed: u64,
) -> Result<(Vec<LabeledDocument>, Vec<LabeledDocument>)> {
    if test_size == 0 || !test_size.is_multiple_of(2) {
        return Err(Error::Argument(format!(
            "test_size must be positive and even, got {test_size}"
        )));
    }
    let per_class = test_size / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut pools: Vec<Vec<&LabeledDocument>> = [NEGATIVE, POSITIVE]
        .iter()
        .map(|class| {
            corpus
                .iter()
                .filter(|(doc, label)| label == class && bucket.contains(doc))
                .collect()
        })
        .collect();
    for (class, pool) in [NEGATIVE, POSITIVE].iter().zip(&pools) {
        if pool.len() < per_class {
            return Err(Error::Split {
                class: *class,
                available: pool.len(),
                required: per_class,
            });
        }
    }

    let mut test = Vec::with_capacity(test_size);
    let mut remainders = Vec::new();
    for pool in pools.iter_mut() {
        pool.shuffle(&mut rng);
        let rest = pool.split_off(per_class);
        test.extend(pool.iter().map(|d| (*d).clone()));
        remainders.push(rest);
    }
    let train_per_class = remainders.iter().map(Vec::len).min().unwrap_or(0);
    let mut train = Vec::with_capacity(2 * train_per_class);
    for rest in remainders.iter_mut() {
        rest.shuffle(&mut rng);
        train.extend(rest.iter().take(train_per_class).map(|d| (*d).clone()));
    }
    Ok((train, test))
}

/// Binary confusion matrix; rows are the actual class, columns the
/// predicted class, negative first.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionMatrix {
    pub fn new(tn: u64, fp: u64, fn_: u64, tp: u64) -> Self {
        ConfusionMatrix { tn, fp, fn_, tp }
    }

    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    pub fn accuracy(&self) -> Result<f64> {
        match self.total() {
            0 => Err(Error::UndefinedMetric("accuracy of an empty matrix")),
            t => Ok((self.tp + self.tn) as f64 / t as f64),
        }
    }

    /// True-positive rate over actual positives.
    pub fn sensitivity(&self) -> Result<f64> {
        match self.tp + self.fn_ {
            0 => Err(Error::UndefinedMetric("sensitivity with no actual positives")),
            p => Ok(self.tp as f64 / p as f64),
        }
    }

    /// True-negative rate over actual negatives.
    pub fn specificity(&self) -> Result<f64> {
        match self.tn + self.fp {
            0 => Err(Error::UndefinedMetric("specificity with no actual negatives")),
            n => Ok(self.tn as f64 / n as f64),
        }
    }
}

pub fn confusion(predictions: &[ClassLabel], actuals: &[ClassLabel]) -> Result<ConfusionMatrix> {
    if predictions.len() != actuals.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} actuals",
            predictions.len(),
            actuals.len()
        )));
    }
    let mut m = ConfusionMatrix::default();
    for (p, a) in predictions.iter().zip(actuals) {
        match (*a == POSITIVE, *p == POSITIVE) {
            (false, false) => m.tn += 1,
            (false, true) => m.fp += 1,
            (true, false) => m.fn_ += 1,
            (true, true) => m.tp += 1,
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

/// All three metrics, or the first one that is undefined.
pub fn metrics(matrix: &ConfusionMatrix) -> Result<Metrics> {
    Ok(Metrics {
        accuracy: matrix.accuracy()?,
        sensitivity: matrix.sensitivity()?,
        specificity: matrix.specificity()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classifier: String,
    pub bucket: LengthBucket,
    pub matrix: ConfusionMatrix,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl EvaluationReport {
    /// Builds a report from test predictions. Accuracy must be defined;
    /// sensitivity or specificity may be absent when a class is missing from
    /// the test set.
    pub fn from_predictions(
        classifier: &str,
        bucket: LengthBucket,
        predictions: &[ClassLabel],
        actuals: &[ClassLabel],
        train_size: usize,
        seed: u64,
    ) -> Result<Self> {
        let matrix = confusion(predictions, actuals)?;
        Ok(EvaluationReport {
            classifier: classifier.to_string(),
            bucket,
            accuracy: matrix.accuracy()?,
            sensitivity: matrix.sensitivity().ok(),
            specificity: matrix.specificity().ok(),
            matrix,
            train_size,
            test_size: actuals.len(),
            seed,
        })
    }
}
