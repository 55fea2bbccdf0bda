//! Pair classification: balanced dataset construction, the baseline logistic
//! scorer, evaluation, thresholding and imported scores from other models.

mod dataset;
mod logistic;
mod scores;

pub use dataset::{build_training_set, split_train_test, LabeledPair};
pub use logistic::{
    evaluate, fit_standardizer, loss_and_gradient, mean_loss, predict_prob, sigmoid, train_logistic,
    EvalMetrics, LogisticParams, ModelMetadata, PairScoreModel, Standardizer, TrainConfig,
    TrainReport, STD_FLOOR,
};
pub use scores::{
    import_external_scores, score_pairs, threshold_pairs, write_scores, PairScore, PairScorer,
    ScoreImport,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Confidence threshold a pair score must reach to become a flock edge.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.9;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("no annotated pairs among the candidate pairs; cannot train")]
    NoPositives,
    #[error("need {needed} negative pairs but only {available} are available")]
    InsufficientNegatives { needed: usize, available: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("split ratio {0} is outside (0, 1)")]
    InvalidRatio(f64),
    #[error("feature vector contains a non-finite value")]
    NonFiniteFeature,
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("unsupported model file: {0}")]
    UnsupportedModel(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Confusion counts of a binary decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BinaryConfusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl BinaryConfusion {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| (self.tp + self.tn) as f64 / n as f64)
    }

    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    /// Harmonic mean of precision and recall; an undefined side counts as 0.
    pub fn f1(&self) -> Option<f64> {
        let (p, r) = (self.precision(), self.recall());
        if p.is_none() && r.is_none() {
            return None;
        }
        let (p, r) = (p.unwrap_or(0.0), r.unwrap_or(0.0));
        Some(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
    }
}
