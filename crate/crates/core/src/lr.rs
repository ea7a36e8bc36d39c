//! Binary logistic regression over bag-of-words counts, trained with plain
//! stochastic gradient descent on the cross-entropy loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{Document, Vocabulary};
use crate::{ClassLabel, NEGATIVE, POSITIVE};

pub const LR_FORMAT: &str = "tweetscope-lr";
pub const LR_FORMAT_VERSION: u32 = 1;

/// Probabilities are clamped to this distance from 0 and 1 before taking the
/// loss during training. Prediction never clamps.
pub const LOSS_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        FeatureVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Term counts of `doc` over `vocab`; unknown tokens are ignored.
pub fn vectorize(doc: &Document, vocab: &Vocabulary) -> FeatureVector {
    let mut values = vec![0.0; vocab.len()];
    for token in &doc.tokens {
        if let Some(i) = vocab.index_of(token) {
            values[i] += 1.0;
        }
    }
    FeatureVector { values }
}

/// Logistic function, evaluated so that `exp` never overflows.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Cross-entropy of a predicted probability against a 0/1 label.
pub fn loss(y_hat: f64, y: ClassLabel) -> Result<f64> {
    if !(y_hat > 0.0 && y_hat < 1.0) {
        return Err(Error::LossDomain(y_hat));
    }
    Ok(if y == POSITIVE {
        -y_hat.ln()
    } else {
        -(1.0 - y_hat).ln()
    })
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn label_value(y: ClassLabel) -> f64 {
    if y == POSITIVE {
        1.0
    } else {
        0.0
    }
}

/// Gradient of the loss for one example: `(sigmoid(w.x + b) - y) * x_j` per
/// weight and `sigmoid(w.x + b) - y` for the bias.
pub fn gradient(w: &[f64], b: f64, x: &FeatureVector, y: ClassLabel) -> Result<(Vec<f64>, f64)> {
    if w.len() != x.len() {
        return Err(Error::Argument(format!(
            "weights have {} entries, features {}",
            w.len(),
            x.len()
        )));
    }
    let residual = sigmoid(dot(w, &x.values) + b) - label_value(y);
    Ok((x.values.iter().map(|xj| residual * xj).collect(), residual))
}

/// One update `theta <- theta - eta * grad L` for a single example.
/// Dimensions must already agree.
pub fn sgd_step(weights: &mut [f64], bias: &mut f64, x: &FeatureVector, y: ClassLabel, eta: f64) {
    debug_assert_eq!(weights.len(), x.len());
    let residual = sigmoid(dot(weights, &x.values) + *bias) - label_value(y);
    for (w, xj) in weights.iter_mut().zip(&x.values) {
        *w -= eta * residual * xj;
    }
    *bias -= eta * residual;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub format: String,
    pub version: u32,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub final_mean_loss: f64,
    /// Feature space the weights are defined over, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary: Option<Vocabulary>,
}

/// Mean training loss after each epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epoch_loss: Vec<f64>,
}

fn mean_loss(weights: &[f64], bias: f64, data: &[(FeatureVector, ClassLabel)]) -> f64 {
    let total: f64 = data
        .iter()
        .map(|(x, y)| {
            let p = sigmoid(dot(weights, &x.values) + bias).clamp(LOSS_CLAMP, 1.0 - LOSS_CLAMP);
            loss(p, *y).expect("clamped probability is inside (0, 1)")
        })
        .sum();
    total / data.len() as f64
}

/// SGD from zero weights. Each epoch visits the examples in an order
/// shuffled by a ChaCha8 stream seeded with `seed`, so equal inputs give a
/// bit-identical model.
pub fn train_lr(
    data: &[(FeatureVector, ClassLabel)],
    eta: f64,
    epochs: usize,
    seed: u64,
) -> Result<(LrModel, TrainTrace)> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::Argument(format!(
            "learning rate must be finite and non-negative, got {eta}"
        )));
    }
    if epochs == 0 {
        return Err(Error::Argument("epochs must be at least 1".into()));
    }
    let Some((first, _)) = data.first() else {
        return Err(Error::Training("no training examples".into()));
    };
    let dim = first.len();
    if data.iter().any(|(x, _)| x.len() != dim) {
        return Err(Error::Argument("feature vectors differ in length".into()));
    }
    if let Some((_, bad)) = data.iter().find(|(_, y)| *y != NEGATIVE && *y != POSITIVE) {
        return Err(Error::Training(format!("label {bad} is not binary")));
    }
    let positives = data.iter().filter(|(_, y)| *y == POSITIVE).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::Training("training data contains a single class".into()));
    }

    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = TrainTrace::default();

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, y) = &data[i];
            sgd_step(&mut weights, &mut bias, x, *y, eta);
        }
        trace.epoch_loss.push(mean_loss(&weights, bias, data));
    }

    let model = LrModel {
        format: LR_FORMAT.to_string(),
        version: LR_FORMAT_VERSION,
        weights,
        bias,
        learning_rate: eta,
        epochs,
        seed,
        final_mean_loss: *trace.epoch_loss.last().expect("epochs >= 1"),
        vocabulary: None,
    };
    Ok((model, trace))
}

impl LrModel {
    pub fn with_vocabulary(mut self, vocab: Vocabulary) -> Self {
        self.vocabulary = Some(vocab);
        self
    }

    /// `(P(y = 1 | x), class)`, with class 1 only when the probability is
    /// strictly above one half.
    pub fn predict(&self, x: &FeatureVector) -> Result<(f64, ClassLabel)> {
        if x.len() != self.weights.len() {
            return Err(Error::Argument(format!(
                "model has {} weights, features {}",
                self.weights.len(),
                x.len()
            )));
        }
        let p = sigmoid(dot(&self.weights, &x.values) + self.bias);
        Ok((p, if p > 0.5 { POSITIVE } else { NEGATIVE }))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: LrModel = serde_json::from_str(json)?;
        if model.format != LR_FORMAT || model.version != LR_FORMAT_VERSION {
            return Err(Error::Argument(format!(
                "unsupported model format {} v{}",
                model.format, model.version
            )));
        }
        if let Some(v) = &model.vocabulary {
            if v.len() != model.weights.len() {
                return Err(Error::Argument("vocabulary size does not match weights".into()));
            }
        }
        Ok(model)
    }
}

pub fn predict_lr(model: &LrModel, x: &FeatureVector) -> Result<(f64, ClassLabel)> {
    model.predict(x)
}
