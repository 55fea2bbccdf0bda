use super::{BinaryConfusion, ClassifierError, LabeledPair};
use crate::pairfeat::{FeatureMeta, PairFeatures};
use crate::seeding::{stage, stage_rng};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

const D: usize = PairFeatures::COUNT;

/// Smallest standard deviation used when scaling a feature column.
pub const STD_FLOOR: f64 = 1e-9;

/// Per-feature mean and (population) standard deviation fitted on training data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: [f64; D],
    pub stds: [f64; D],
}

impl Standardizer {
    pub fn fit(rows: &[[f64; D]]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut means = [0.0; D];
        for r in rows {
            for k in 0..D {
                means[k] += r[k];
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = [0.0; D];
        for r in rows {
            for k in 0..D {
                let d = r[k] - means[k];
                stds[k] += d * d;
            }
        }
        stds.iter_mut().for_each(|s| *s = (*s / n).sqrt().max(STD_FLOOR));
        Self { means, stds }
    }

    pub fn transform(&self, x: &[f64; D]) -> [f64; D] {
        std::array::from_fn(|k| (x[k] - self.means[k]) / self.stds[k])
    }
}

pub fn fit_standardizer(train: &[LabeledPair]) -> Standardizer {
    let rows: Vec<[f64; D]> = train.iter().map(|p| p.features.to_array()).collect();
    Standardizer::fit(&rows)
}

/// Weights and bias of the logistic scorer, acting on standardized features.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LogisticParams {
    pub weights: [f64; D],
    pub bias: f64,
}

impl LogisticParams {
    pub fn logit(&self, z: &[f64; D]) -> f64 {
        self.weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Mean binary cross-entropy.
pub fn mean_loss(params: &LogisticParams, xs: &[[f64; D]], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    xs.iter()
        .zip(ys)
        .map(|(x, &y)| {
            let t = params.logit(x);
            softplus(t) - y * t
        })
        .sum::<f64>()
        / n
}

/// Mean cross-entropy and its gradient with respect to `(weights, bias)`.
pub fn loss_and_gradient(params: &LogisticParams, xs: &[[f64; D]], ys: &[f64]) -> (f64, LogisticParams) {
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut grad = LogisticParams::default();
    for (x, &y) in xs.iter().zip(ys) {
        let t = params.logit(x);
        loss += softplus(t) - y * t;
        let r = sigmoid(t) - y;
        for k in 0..D {
            grad.weights[k] += r * x[k];
        }
        grad.bias += r;
    }
    grad.weights.iter_mut().for_each(|g| *g /= n);
    grad.bias /= n;
    (loss / n, grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Epochs without a validation improvement of at least `min_delta` before stopping.
    pub patience: usize,
    pub min_delta: f64,
    pub validation_fraction: f64,
    /// Smallest usable held-out set. When `validation_fraction` of the data is
    /// fewer rows than this, nothing is held out and early stopping watches the
    /// training loss instead; a handful of rows makes a noisy stopping signal.
    #[serde(default = "default_min_validation")]
    pub min_validation: usize,
    pub seed: u64,
}

fn default_min_validation() -> usize {
    10
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            max_epochs: 1000,
            patience: 25,
            min_delta: 1e-6,
            validation_fraction: 0.1,
            min_validation: default_min_validation(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub fit_samples: usize,
    pub validation_samples: usize,
    pub initial_train_loss: f64,
    pub final_train_loss: f64,
    pub best_validation_loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub features: FeatureMeta,
    pub train: TrainConfig,
    pub decision_threshold: f64,
}

/// Standardized logistic pair scorer with everything needed to reproduce its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScoreModel {
    pub schema: String,
    pub params: LogisticParams,
    pub standardizer: Standardizer,
    pub metadata: ModelMetadata,
}

impl PairScoreModel {
    pub fn schema_name() -> String {
        format!("crowdflock.pair-model.{}", crate::SCHEMA_VERSION)
    }

    pub fn new(params: LogisticParams, standardizer: Standardizer, metadata: ModelMetadata) -> Self {
        Self {
            schema: Self::schema_name(),
            params,
            standardizer,
            metadata,
        }
    }

    pub fn save<W: Write>(&self, w: W) -> Result<(), ClassifierError> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn load<R: Read>(r: R) -> Result<Self, ClassifierError> {
        let m: Self = serde_json::from_reader(r)?;
        if m.schema != Self::schema_name() {
            return Err(ClassifierError::UnsupportedModel(m.schema));
        }
        if m.standardizer.stds.iter().any(|s| !(*s > 0.0)) {
            return Err(ClassifierError::UnsupportedModel("non-positive feature std".into()));
        }
        Ok(m)
    }
}

fn design(pairs: &[LabeledPair], st: &Standardizer) -> (Vec<[f64; D]>, Vec<f64>) {
    pairs
        .iter()
        .map(|p| (st.transform(&p.features.to_array()), if p.label { 1.0 } else { 0.0 }))
        .unzip()
}

/// Full-batch gradient descent from zero weights with validation early stopping.
///
/// The standardizer is fitted on all of `train`; a seeded `validation_fraction`
/// of it is held out to monitor loss, and the best-validation parameters are
/// returned. Below `min_validation` held-out rows the whole set is fitted and
/// the monitored loss is the training loss.
pub fn train_logistic(
    train: &[LabeledPair],
    config: &TrainConfig,
    features: FeatureMeta,
) -> Result<(PairScoreModel, TrainReport), ClassifierError> {
    let n_pos = train.iter().filter(|p| p.label).count();
    if n_pos == 0 || n_pos == train.len() {
        return Err(ClassifierError::SingleClass);
    }
    let standardizer = fit_standardizer(train);
    let (xs, ys) = design(train, &standardizer);

    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut stage_rng(config.seed, stage::VALIDATION_SPLIT));
    let wanted = (config.validation_fraction * train.len() as f64).round() as usize;
    let n_val = if wanted >= config.min_validation.max(1) && train.len() >= 2 {
        wanted.min(train.len() - 1)
    } else {
        0
    };
    let (val_idx, fit_idx) = order.split_at(n_val);
    let pick = |idx: &[usize]| -> (Vec<[f64; D]>, Vec<f64>) { idx.iter().map(|&i| (xs[i], ys[i])).unzip() };
    let (fit_x, fit_y) = pick(fit_idx);
    let (val_x, val_y) = if n_val > 0 { pick(val_idx) } else { (fit_x.clone(), fit_y.clone()) };

    let mut params = LogisticParams::default();
    let initial_train_loss = mean_loss(&params, &xs, &ys);
    let mut best = params;
    let mut best_val = mean_loss(&params, &val_x, &val_y);
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut epochs_run = 0;
    let mut stopped_early = false;

    for epoch in 1..=config.max_epochs {
        let (_, g) = loss_and_gradient(&params, &fit_x, &fit_y);
        for k in 0..D {
            params.weights[k] -= config.learning_rate * g.weights[k];
        }
        params.bias -= config.learning_rate * g.bias;
        epochs_run = epoch;

        let val = mean_loss(&params, &val_x, &val_y);
        if val < best_val - config.min_delta {
            best_val = val;
            best = params;
            best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }

    let correct = xs
        .iter()
        .zip(&ys)
        .filter(|(x, &y)| (sigmoid(best.logit(x)) > 0.5) == (y == 1.0))
        .count();
    let report = TrainReport {
        epochs_run,
        best_epoch,
        stopped_early,
        fit_samples: fit_x.len(),
        validation_samples: n_val,
        initial_train_loss,
        final_train_loss: mean_loss(&best, &xs, &ys),
        best_validation_loss: best_val,
        train_accuracy: correct as f64 / xs.len() as f64,
    };
    let metadata = ModelMetadata {
        features,
        train: *config,
        decision_threshold: 0.5,
    };
    Ok((PairScoreModel::new(best, standardizer, metadata), report))
}

/// `sigmoid(w · standardize(x) + b)`.
pub fn predict_prob(model: &PairScoreModel, features: &PairFeatures) -> Result<f64, ClassifierError> {
    if !features.is_finite() {
        return Err(ClassifierError::NonFiniteFeature);
    }
    let z = model.standardizer.transform(&features.to_array());
    Ok(sigmoid(model.params.logit(&z)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub accuracy: f64,
    /// 0 when no positives were predicted.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: BinaryConfusion,
}

/// Metrics at decision threshold 0.5; a probability of exactly 0.5 predicts 0.
pub fn evaluate(model: &PairScoreModel, test: &[LabeledPair]) -> Result<EvalMetrics, ClassifierError> {
    if test.is_empty() {
        return Err(ClassifierError::EmptyTestSet);
    }
    let mut c = BinaryConfusion::default();
    for p in test {
        c.record(predict_prob(model, &p.features)? > 0.5, p.label);
    }
    Ok(EvalMetrics {
        accuracy: c.accuracy().unwrap_or(0.0),
        precision: c.precision().unwrap_or(0.0),
        recall: c.recall().unwrap_or(0.0),
        f1: c.f1().unwrap_or(0.0),
        confusion: c,
    })
}
