use super::PipelineError;
use crate::binning::BinningConfig;
use crate::classifier::{TrainConfig, DEFAULT_EDGE_THRESHOLD};
use crate::metrics::{EncounterConfig, MetricsConfig};
use crate::pairfeat::{DtwConvention, FeatureConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Where pair probabilities come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierMode {
    /// Fit the logistic baseline on the annotated pairs of this run.
    #[default]
    Train,
    /// Apply a saved model file.
    LoadModel,
    /// Read per-pair probabilities produced elsewhere.
    ExternalScores,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub validation_fraction: f64,
    pub min_validation: usize,
    /// Share of the balanced pair set used for fitting; the rest is the test split.
    pub split_ratio: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: PIPELINE_LEARNING_RATE,
            max_epochs: t.max_epochs,
            patience: t.patience,
            min_delta: t.min_delta,
            validation_fraction: t.validation_fraction,
            min_validation: t.min_validation,
            split_ratio: 0.8,
        }
    }
}

/// Step size used by `run` unless configured otherwise. The standalone `train`
/// command keeps [`TrainConfig`]'s 0.001, which cannot lift any probability
/// past the 0.9 edge threshold within 1000 epochs; see the README.
pub const PIPELINE_LEARNING_RATE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    pub d_enc_mm: f64,
    pub hysteresis_mm: f64,
    pub window: usize,
    pub cell_mm: f64,
}

impl Default for MetricSection {
    fn default() -> Self {
        let e = EncounterConfig::default();
        Self { d_enc_mm: e.d_enc_mm, hysteresis_mm: e.hysteresis_mm, window: e.window, cell_mm: 500.0 }
    }
}

/// Everything a full run needs. Loaded from TOML; every key is optional except
/// the input paths the chosen classifier mode requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub tracking: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub geometry: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub interval_s: f64,
    pub seq_len: usize,
    pub rate_hz: f64,
    pub threshold: f64,
    pub seed: u64,
    pub classifier: ClassifierMode,
    /// Model file for `load-model`.
    pub model: Option<PathBuf>,
    /// Score file for `external-scores`.
    pub scores: Option<PathBuf>,
    pub dtw: DtwConvention,
    pub train: TrainSection,
    pub metrics: MetricSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tracking: None,
            groups: None,
            geometry: None,
            out_dir: PathBuf::from("crowdflock-out"),
            interval_s: 60.0,
            seq_len: 60,
            rate_hz: 3.0,
            threshold: DEFAULT_EDGE_THRESHOLD,
            seed: 0,
            classifier: ClassifierMode::Train,
            model: None,
            scores: None,
            dtw: DtwConvention::default(),
            train: TrainSection::default(),
            metrics: MetricSection::default(),
        }
    }
}

fn range(ok: bool, what: &str) -> Result<(), PipelineError> {
    if ok {
        Ok(())
    } else {
        Err(PipelineError::Config(what.to_string()))
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a TOML file; relative paths inside it are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_relative_to(base);
        }
        Ok(cfg)
    }

    pub fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.tracking, &mut self.groups, &mut self.geometry, &mut self.model, &mut self.scores]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.out_dir);
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        range(self.interval_s.is_finite() && self.interval_s > 0.0, "interval_s must be > 0")?;
        range(self.seq_len >= 2, "seq_len must be >= 2")?;
        range(self.rate_hz.is_finite() && self.rate_hz > 0.0, "rate_hz must be > 0")?;
        range((0.0..=1.0).contains(&self.threshold), "threshold must lie in [0, 1]")?;
        range(self.tracking.is_some(), "tracking path is required")?;
        range(self.geometry.is_some(), "geometry path is required")?;
        match self.classifier {
            ClassifierMode::Train => range(self.groups.is_some(), "classifier = \"train\" needs a groups file")?,
            ClassifierMode::LoadModel => range(self.model.is_some(), "classifier = \"load-model\" needs model")?,
            ClassifierMode::ExternalScores => {
                range(self.scores.is_some(), "classifier = \"external-scores\" needs scores")?
            }
        }
        let t = &self.train;
        range(t.learning_rate.is_finite() && t.learning_rate > 0.0, "train.learning_rate must be > 0")?;
        range(t.split_ratio > 0.0 && t.split_ratio < 1.0, "train.split_ratio must lie in (0, 1)")?;
        range(
            (0.0..1.0).contains(&t.validation_fraction),
            "train.validation_fraction must lie in [0, 1)",
        )?;
        let m = &self.metrics;
        range(m.d_enc_mm.is_finite() && m.d_enc_mm > 0.0, "metrics.d_enc_mm must be > 0")?;
        range(m.hysteresis_mm.is_finite() && m.hysteresis_mm >= 0.0, "metrics.hysteresis_mm must be >= 0")?;
        range(m.window >= 1, "metrics.window must be >= 1")?;
        range(m.cell_mm.is_finite() && m.cell_mm > 0.0, "metrics.cell_mm must be > 0")?;
        Ok(())
    }

    pub fn binning(&self) -> BinningConfig {
        BinningConfig {
            interval_ms: (self.interval_s * 1000.0).round() as i64,
            rate_hz: self.rate_hz,
            seq_len: self.seq_len,
        }
    }

    pub fn features(&self) -> FeatureConfig {
        FeatureConfig { dtw: self.dtw }
    }

    pub fn training(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            max_epochs: self.train.max_epochs,
            patience: self.train.patience,
            min_delta: self.train.min_delta,
            validation_fraction: self.train.validation_fraction,
            min_validation: self.train.min_validation,
            seed: self.seed,
        }
    }

    pub fn metrics(&self) -> MetricsConfig {
        MetricsConfig {
            encounter: EncounterConfig {
                d_enc_mm: self.metrics.d_enc_mm,
                hysteresis_mm: self.metrics.hysteresis_mm,
                window: self.metrics.window,
            },
            cell_mm: self.metrics.cell_mm,
            seed: self.seed,
        }
    }
}
