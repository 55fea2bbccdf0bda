//! End-to-end orchestration: ingest, bin, features, train/score, detect,
//! analyze, with one seed and every intermediate artifact on disk.

mod config;
mod stages;
mod synth;

pub use config::{ClassifierMode, MetricSection, PipelineConfig, TrainSection, PIPELINE_LEARNING_RATE};
pub use stages::*;
pub use synth::{
    generate_synthetic_scenario, Direction, PlantedParams, ScenarioSpec, SynthError, SyntheticScenario, WalkerSpec,
};

use crate::ingest::annotation_pair_set;
use crate::metrics::{analyze_bins, write_analysis};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{stage}: input error: {message}")]
    Input { stage: &'static str, message: String },
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    pub fn input(stage: &'static str, message: impl Into<String>) -> Self {
        Self::Input { stage, message: message.into() }
    }

    pub fn stage(stage: &'static str, message: impl Into<String>) -> Self {
        Self::Stage { stage, message: message.into() }
    }

    /// 1 usage/configuration, 2 unreadable or invalid input, 3 stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Input { .. } => 2,
            Self::Stage { .. } => 3,
        }
    }

    pub fn stage_name(&self) -> Option<&'static str> {
        match self {
            Self::Config(_) => None,
            Self::Input { stage, .. } | Self::Stage { stage, .. } => Some(stage),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    pub duration_s: f64,
    pub counts: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Written to `manifest.json` in every output directory. This is the only
/// output that contains timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub software: String,
    pub version: String,
    pub config: PipelineConfig,
    pub stages: Vec<StageRecord>,
    pub warnings: Vec<String>,
    /// Output files relative to the output directory.
    pub outputs: Vec<String>,
    pub total_duration_s: f64,
    pub complete: bool,
}

pub const STAGES: [&str; 7] = ["ingest", "bin", "features", "train", "score", "detect", "analyze"];

impl RunManifest {
    fn new(config: &PipelineConfig) -> Self {
        Self {
            schema: format!("crowdflock.manifest.{}", crate::SCHEMA_VERSION),
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            stages: Vec::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
            total_duration_s: 0.0,
            complete: false,
        }
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// Integer count recorded by a stage.
    pub fn count(&self, stage: &str, key: &str) -> Option<u64> {
        self.stage(stage)?.counts.get(key)?.as_u64()
    }

    fn skip(&mut self, name: &str) {
        self.stages.push(StageRecord {
            name: name.to_string(),
            status: StageStatus::Skipped,
            duration_s: 0.0,
            counts: BTreeMap::new(),
            error: None,
        });
    }

    fn run<T>(
        &mut self,
        name: &'static str,
        f: impl FnOnce(&mut Counts) -> Result<T, PipelineError>,
    ) -> Result<T, PipelineError> {
        let start = Instant::now();
        let mut counts = Counts::default();
        let result = f(&mut counts);
        self.outputs.append(&mut counts.outputs);
        self.warnings.append(&mut counts.warnings);
        self.stages.push(StageRecord {
            name: name.to_string(),
            status: if result.is_ok() { StageStatus::Ok } else { StageStatus::Failed },
            duration_s: start.elapsed().as_secs_f64(),
            counts: counts.values,
            error: result.as_ref().err().map(|e| e.to_string()),
        });
        result
    }
}

#[derive(Default)]
struct Counts {
    values: BTreeMap<String, serde_json::Value>,
    outputs: Vec<String>,
    warnings: Vec<String>,
}

impl Counts {
    fn set(&mut self, key: &str, v: impl Into<serde_json::Value>) {
        self.values.insert(key.to_string(), v.into());
    }

    fn wrote(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

/// Runs every stage in order, writing all artifacts and `manifest.json` into
/// `config.out_dir`. On failure the manifest is still written, marks the
/// failing stage FAILED and the rest SKIPPED, and has `complete = false`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunManifest, PipelineError> {
    config.validate()?;
    let out = config.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(|e| PipelineError::Config(format!("{}: {e}", out.display())))?;
    let mut m = RunManifest::new(config);
    let start = Instant::now();
    let result = run_stages(config, &out, &mut m);
    for name in STAGES {
        if m.stage(name).is_none() {
            m.skip(name);
        }
    }
    m.stages.sort_by_key(|s| STAGES.iter().position(|n| *n == s.name));
    m.total_duration_s = start.elapsed().as_secs_f64();
    m.complete = result.is_ok();
    m.outputs.push("manifest.json".into());
    let manifest_path = out.join("manifest.json");
    let mut w = create("manifest", &manifest_path)?;
    serde_json::to_writer_pretty(&mut w, &m).map_err(|e| PipelineError::stage("manifest", e.to_string()))?;
    use std::io::Write;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| PipelineError::stage("manifest", e.to_string()))?;
    result.map(|_| m)
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, PipelineError> {
    p.as_deref().ok_or_else(|| PipelineError::Config(format!("{what} path is required")))
}

fn run_stages(cfg: &PipelineConfig, out: &Path, m: &mut RunManifest) -> Result<(), PipelineError> {
    let tracking = required(&cfg.tracking, "tracking")?;
    let geometry = required(&cfg.geometry, "geometry")?;

    let ingested = m.run("ingest", |c| {
        let r = ingest_stage(tracking, cfg.groups.as_deref(), geometry)?;
        let s = &r.summary;
        c.set("rows_read", s.rows_read);
        c.set("malformed_rows", s.malformed_rows);
        c.set("agents", s.filtered.agents);
        c.set("records", s.filtered.total_records);
        c.set("points_outside_boundary", s.points_outside_boundary);
        c.set("annotated_groups_rows", s.annotation_rows);
        c.set("annotated_pairs", s.annotated_pairs);
        if s.malformed_rows > 0 {
            c.warn(format!("ingest: skipped {} malformed tracking rows", s.malformed_rows));
        }
        if s.annotation_asymmetries > 0 {
            c.warn(format!("ingest: {} annotation asymmetries", s.annotation_asymmetries));
        }
        write_json("ingest", &out.join("ingest_summary.json"), "ingest-summary", s)?;
        c.wrote("ingest_summary.json");
        let w = create("ingest", &out.join("tracking_filtered.csv"))?;
        crate::ingest::write_tracking_csv(w, r.trajectories.values())
            .map_err(|e| PipelineError::stage("ingest", e.to_string()))?;
        c.wrote("tracking_filtered.csv");
        Ok(r)
    })?;

    let binning = cfg.binning();
    let prepared = m.run("bin", |c| {
        let (prepared, summary) = bin_stage(ingested.trajectories.values(), &binning);
        c.set("input_agents", summary.input_trajectories);
        c.set("bins", summary.stats.bins);
        c.set("non_empty_bins", summary.stats.non_empty_bins);
        c.set("agents", summary.stats.total_agents);
        c.set("too_short", summary.too_short);
        write_bins_file("bin", &out.join("bins.csv"), &prepared)?;
        c.wrote("bins.csv");
        write_json("bin", &out.join("bin_stats.json"), "bin-stats", &summary)?;
        c.wrote("bin_stats.json");
        Ok(prepared)
    })?;

    let (rows, meta) = m.run("features", |c| {
        let (table, meta) = features_stage(&prepared.bins, &binning, &cfg.features());
        c.set("agents", prepared.bins.iter().map(|b| b.windows.len()).sum::<usize>());
        c.set("pairs", table.rows.len());
        c.set("skipped_pairs", table.skipped.len());
        if !table.skipped.is_empty() {
            c.warn(format!("features: skipped {} pairs with undefined features", table.skipped.len()));
        }
        write_features_file("features", &out.join("features.csv"), &table.rows, &meta)?;
        c.wrote("features.csv");
        Ok((table.rows, meta))
    })?;

    let model = match cfg.classifier {
        ClassifierMode::Train => Some(m.run("train", |c| {
            let annotated = annotation_pair_set(&ingested.annotations);
            let (model, summary) = train_stage(&rows, &annotated, cfg.train.split_ratio, &cfg.training(), meta)?;
            c.set("balanced_pairs", summary.balanced_pairs);
            c.set("train_pairs", summary.train_pairs);
            c.set("test_pairs", summary.test_pairs);
            c.set("epochs", summary.report.epochs_run);
            save_model("train", &out.join("model.json"), &model)?;
            c.wrote("model.json");
            write_json("train", &out.join("train_report.json"), "train-report", &summary)?;
            c.wrote("train_report.json");
            Ok(model)
        })?),
        ClassifierMode::LoadModel => Some(m.run("train", |c| {
            let model = load_model("train", required(&cfg.model, "model")?)?;
            if model.metadata.features != meta {
                c.warn(format!(
                    "train: model was fitted on {:?}, features are {:?}",
                    model.metadata.features, meta
                ));
            }
            c.set("loaded", 1);
            Ok(model)
        })?),
        ClassifierMode::ExternalScores => None,
    };

    let scores = m.run("score", |c| {
        let scores = match &model {
            Some(model) => score_stage(model, &rows)?,
            None => load_scores("score", required(&cfg.scores, "scores")?)?,
        };
        c.set("scored_pairs", scores.len());
        c.set("confident_pairs", scores.iter().filter(|s| s.probability >= cfg.threshold).count());
        write_scores_file("score", &out.join("scores.csv"), &scores)?;
        c.wrote("scores.csv");
        Ok(scores)
    })?;

    let assignments = m.run("detect", |c| {
        let members = members_by_bin(&prepared.bins);
        let (assignments, summary) = detect_stage(&members, &scores, cfg.threshold)?;
        c.set("agents", summary.total_agents);
        c.set("flock_agents", summary.flock_agents);
        c.set("flocks", summary.flocks);
        let w = create("detect", &out.join("assignments.csv"))?;
        crate::flock::write_assignments(w, &assignments).map_err(|e| PipelineError::stage("detect", e.to_string()))?;
        c.wrote("assignments.csv");
        write_json("detect", &out.join("flock_summary.json"), "flock-summary", &summary)?;
        c.wrote("flock_summary.json");
        if !ingested.annotations.is_empty() {
            let v = validate_stage(&assignments, &ingested.annotations);
            if let Some(f1) = v.pair_f1 {
                c.set("pair_f1", f1);
            }
            write_json("detect", &out.join("validation.json"), "validation", &v)?;
            c.wrote("validation.json");
        }
        Ok(assignments)
    })?;

    m.run("analyze", |c| {
        let report = analyze_bins(&prepared.bins, &assignments, &ingested.geometry, prepared.origin_ms, &cfg.metrics())
            .map_err(|e| PipelineError::stage("analyze", e.to_string()))?;
        c.set("footprints", report.footprints.len());
        c.set("encounters", report.events.len());
        c.set("heatmap_points", report.heatmap.total());
        let dir = out.join("analysis");
        let files = write_analysis(&dir, &report).map_err(|e| PipelineError::stage("analyze", e.to_string()))?;
        for f in files {
            if let Some(name) = f.file_name() {
                c.wrote(&format!("analysis/{}", name.to_string_lossy()));
            }
        }
        Ok(())
    })
}

/// Files written by [`write_synthetic`].
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub tracking: PathBuf,
    pub groups: PathBuf,
    pub geometry: PathBuf,
    pub config: PathBuf,
    pub agents: usize,
    pub groups_planted: usize,
}

/// Generates the planted scenario into `dir`: tracking.csv, groups.txt,
/// env.json, scenario.json and a ready-to-run pipeline.toml.
pub fn write_synthetic(dir: &Path, params: &PlantedParams, seed: u64) -> Result<SynthOutput, PipelineError> {
    const S: &str = "synth";
    let spec = ScenarioSpec::planted(params, seed);
    let scenario = generate_synthetic_scenario(&spec, seed).map_err(|e| PipelineError::Config(e.to_string()))?;
    let io = |e: std::io::Error| PipelineError::stage(S, e.to_string());
    let out = SynthOutput {
        tracking: dir.join("tracking.csv"),
        groups: dir.join("groups.txt"),
        geometry: dir.join("env.json"),
        config: dir.join("pipeline.toml"),
        agents: scenario.agents(),
        groups_planted: scenario.groups(),
    };
    scenario.write_tracking(create(S, &out.tracking)?).map_err(io)?;
    scenario.write_groups(create(S, &out.groups)?).map_err(io)?;
    scenario.write_geometry(create(S, &out.geometry)?).map_err(io)?;
    write_json(S, &dir.join("scenario.json"), "scenario", &serde_json::json!({ "seed": seed, "spec": spec }))?;
    let cfg = PipelineConfig {
        tracking: Some("tracking.csv".into()),
        groups: Some("groups.txt".into()),
        geometry: Some("env.json".into()),
        out_dir: "out".into(),
        seed,
        ..Default::default()
    };
    let mut w = create(S, &out.config)?;
    use std::io::Write;
    write!(w, "# crowdflock pipeline-config {}\n{}", crate::SCHEMA_VERSION, cfg.to_toml_string())
        .and_then(|_| w.flush())
        .map_err(io)?;
    Ok(out)
}
