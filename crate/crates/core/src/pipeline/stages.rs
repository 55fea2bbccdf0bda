//! One function per CLI stage. Each reads and writes the documented file
//! formats so stages can be chained by hand or resumed from any artifact.

use super::PipelineError;
use crate::binning::{bin_stats, prepare_bins, read_bins, write_bins, BinStatsReport, BinningConfig, PreparedBins, TimeBin};
use crate::classifier::{
    build_training_set, evaluate, import_external_scores, score_pairs, split_train_test, train_logistic, write_scores,
    EvalMetrics, PairScore, PairScoreModel, TrainConfig, TrainReport,
};
use crate::flock::{detect_flocks, flock_summary, validate_assignment, FlockAssignment, FlockSummaryReport, ValidationReport};
use crate::ingest::{
    annotation_pair_set, filter_to_boundary, find_asymmetries, parse_environment, parse_group_annotations,
    parse_tracking_csv, summarize_dataset, DatasetSummary, EnvironmentGeometry, GroupAnnotation, Trajectory,
};
use crate::pairfeat::{extract_all_pairs, read_features, write_features, FeatureConfig, FeatureMeta, PairFeatureTable, PairRecord};
use crate::{Pid, PidPair, SCHEMA_VERSION};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

/// Buffered reader; a missing file is an input error.
pub fn open(stage: &'static str, path: &Path) -> Result<BufReader<File>, PipelineError> {
    File::open(path)
        .map(|f| BufReader::with_capacity(1 << 16, f))
        .map_err(|e| PipelineError::input(stage, format!("{}: {e}", path.display())))
}

/// Buffered writer, creating parent directories.
pub fn create(stage: &'static str, path: &Path) -> Result<BufWriter<File>, PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::stage(stage, format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PipelineError::stage(stage, format!("{}: {e}", path.display())))
}

/// Writes `value` as pretty JSON with a leading `schema` key.
pub fn write_json<T: Serialize>(stage: &'static str, path: &Path, kind: &str, value: &T) -> Result<(), PipelineError> {
    let fail = |e: String| PipelineError::stage(stage, format!("{}: {e}", path.display()));
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), format!("crowdflock.{kind}.{SCHEMA_VERSION}").into());
    match serde_json::to_value(value).map_err(|e| fail(e.to_string()))? {
        serde_json::Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("value".into(), other);
        }
    }
    let mut w = create(stage, path)?;
    serde_json::to_writer_pretty(&mut w, &map).map_err(|e| fail(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| fail(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub rows_read: usize,
    pub malformed_rows: usize,
    pub header_skipped: bool,
    pub duplicate_timestamps: usize,
    pub raw: DatasetSummary,
    pub points_outside_boundary: usize,
    pub trajectories_outside_boundary: usize,
    pub filtered: DatasetSummary,
    pub boundary_area_m2: f64,
    pub pillars: usize,
    pub spots: usize,
    pub annotation_rows: usize,
    pub annotation_rows_skipped: usize,
    pub annotated_pairs: usize,
    pub annotation_asymmetries: usize,
}

pub struct IngestOutput {
    pub trajectories: BTreeMap<Pid, Trajectory>,
    pub annotations: Vec<GroupAnnotation>,
    pub geometry: EnvironmentGeometry,
    pub summary: IngestSummary,
}

pub fn load_geometry(stage: &'static str, path: &Path) -> Result<EnvironmentGeometry, PipelineError> {
    parse_environment(open(stage, path)?).map_err(|e| PipelineError::input(stage, format!("{}: {e}", path.display())))
}

pub fn load_annotations(stage: &'static str, path: &Path) -> Result<(Vec<GroupAnnotation>, usize), PipelineError> {
    let parsed = parse_group_annotations(open(stage, path)?)
        .map_err(|e| PipelineError::input(stage, format!("{}: {e}", path.display())))?;
    Ok((parsed.annotations, parsed.skipped.len()))
}

/// Parse tracking data, annotations and geometry, and drop out-of-boundary points.
pub fn ingest_stage(tracking: &Path, groups: Option<&Path>, env: &Path) -> Result<IngestOutput, PipelineError> {
    const S: &str = "ingest";
    let geometry = load_geometry(S, env)?;
    let parsed = parse_tracking_csv(open(S, tracking)?)
        .map_err(|e| PipelineError::input(S, format!("{}: {e}", tracking.display())))?;
    let raw = summarize_dataset(parsed.trajectories.values())
        .map_err(|e| PipelineError::input(S, format!("{}: {e}", tracking.display())))?;
    let filtered = filter_to_boundary(parsed.trajectories, &geometry);
    let filtered_summary = summarize_dataset(filtered.trajectories.values())
        .map_err(|_| PipelineError::input(S, "no tracking points inside the boundary"))?;
    let (annotations, skipped) = match groups {
        Some(p) => load_annotations(S, p)?,
        None => (Vec::new(), 0),
    };
    let asym = find_asymmetries(&annotations).len();
    if asym > 0 {
        log::warn!("{asym} group annotations are not reciprocated");
    }
    let summary = IngestSummary {
        rows_read: parsed.rows_read,
        malformed_rows: parsed.malformed_rows,
        header_skipped: parsed.header_skipped,
        duplicate_timestamps: parsed.duplicate_timestamps,
        raw,
        points_outside_boundary: filtered.points_removed,
        trajectories_outside_boundary: filtered.trajectories_dropped,
        filtered: filtered_summary,
        boundary_area_m2: geometry.area_m2(),
        pillars: geometry.pillars().len(),
        spots: geometry.spots().len(),
        annotation_rows: annotations.len(),
        annotation_rows_skipped: skipped,
        annotated_pairs: annotation_pair_set(&annotations).len(),
        annotation_asymmetries: asym,
    };
    Ok(IngestOutput { trajectories: filtered.trajectories, annotations, geometry, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct BinSummary {
    pub config: BinningConfig,
    pub origin_ms: i64,
    pub input_trajectories: usize,
    pub unresampleable: usize,
    pub too_short: usize,
    pub stats: BinStatsReport,
}

pub fn bin_stage<'a, I>(trajectories: I, cfg: &BinningConfig) -> (PreparedBins, BinSummary)
where
    I: IntoIterator<Item = &'a Trajectory>,
{
    let input: Vec<&Trajectory> = trajectories.into_iter().collect();
    let prepared = prepare_bins(input.iter().copied(), cfg);
    let summary = BinSummary {
        config: *cfg,
        origin_ms: prepared.origin_ms,
        input_trajectories: input.len(),
        unresampleable: prepared.unresampleable,
        too_short: prepared.too_short,
        stats: bin_stats(&prepared.bins),
    };
    (prepared, summary)
}

pub fn write_bins_file(stage: &'static str, path: &Path, prepared: &PreparedBins) -> Result<(), PipelineError> {
    let w = create(stage, path)?;
    write_bins(w, &prepared.bins, &prepared.config, prepared.origin_ms)
        .map_err(|e| PipelineError::stage(stage, format!("{}: {e}", path.display())))
}

pub struct LoadedBins {
    pub config: BinningConfig,
    pub origin_ms: i64,
    pub bins: Vec<TimeBin>,
}

pub fn load_bins(stage: &'static str, path: &Path) -> Result<LoadedBins, PipelineError> {
    let f = read_bins(open(stage, path)?).map_err(|e| PipelineError::input(stage, format!("{}: {e}", path.display())))?;
    Ok(LoadedBins { config: f.config, origin_ms: f.origin_ms, bins: f.bins })
}

pub fn features_stage(bins: &[TimeBin], binning: &BinningConfig, cfg: &FeatureConfig) -> (PairFeatureTable, FeatureMeta) {
    let table = extract_all_pairs(bins, cfg);
    for s in &table.skipped {
        log::warn!("bin {} pair {}: {}", s.bin_index, s.pair, s.error);
    }
    let meta = FeatureMeta { rate_hz: binning.rate_hz, seq_len: binning.seq_len, dtw: cfg.dtw };
    (table, meta)
}

pub fn write_features_file(stage: &'static str, path: &Path, rows: &[PairRecord], meta: &FeatureMeta) -> Result<(), PipelineError> {
    write_features(create(stage, path)?, rows, meta).map_err(|e| PipelineError::stage(stage, format!("{}: {e}", path.display())))
}

pub fn load_features(stage: &'static str, path: &Path) -> Result<(Vec<PairRecord>, FeatureMeta), PipelineError> {
    let f = read_features(open(stage, path)?).map_err(|e| PipelineError::input(stage, format!("{}: {e}", path.display())))?;
    Ok((f.rows, f.meta))
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub candidate_pairs: usize,
    pub balanced_pairs: usize,
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub report: TrainReport,
    /// Test-split metrics at the 0.5 decision threshold.
    pub test: Option<EvalMetrics>,
}

/// Balanced dataset, stratified split, logistic fit, held-out evaluation.
pub fn train_stage(
    rows: &[PairRecord],
    annotated: &BTreeSet<PidPair>,
    split_ratio: f64,
    cfg: &TrainConfig,
    meta: FeatureMeta,
) -> Result<(PairScoreModel, TrainSummary), PipelineError> {
    const S: &str = "train";
    let fail = |e: crate::classifier::ClassifierError| PipelineError::stage(S, e.to_string());
    let balanced = build_training_set(rows, annotated, cfg.seed).map_err(fail)?;
    let (train, test) = split_train_test(&balanced, split_ratio, cfg.seed).map_err(fail)?;
    let (model, report) = train_logistic(&train, cfg, meta).map_err(fail)?;
    let test_metrics = if test.is_empty() { None } else { Some(evaluate(&model, &test).map_err(fail)?) };
    let summary = TrainSummary {
        candidate_pairs: rows.len(),
        balanced_pairs: balanced.len(),
        train_pairs: train.len(),
        test_pairs: test.len(),
        report,
        test: test_metrics,
    };
    Ok((model, summary))
}

pub fn save_model(stage: &'static str, path: &Path, model: &PairScoreModel) -> Result<(), PipelineError> {
    let mut w = create(stage, path)?;
    model
        .save(&mut w)
        .and_then(|_| writeln!(w).and_then(|_| w.flush()).map_err(Into::into))
        .map_err(|e| PipelineError::stage(stage, format!("{}: {e}", path.display())))
}

pub fn load_model(stage: &'static str, path: &Path) -> Result<PairScoreModel, PipelineError> {
    PairScoreModel::load(open(stage, path)?).map_err(|e| PipelineError::input(stage, format!("{}: {e}", path.display())))
}

pub fn score_stage(model: &PairScoreModel, rows: &[PairRecord]) -> Result<Vec<PairScore>, PipelineError> {
    score_pairs(model, rows).map_err(|e| PipelineError::stage("score", e.to_string()))
}

pub fn write_scores_file(stage: &'static str, path: &Path, scores: &[PairScore]) -> Result<(), PipelineError> {
    write_scores(create(stage, path)?, scores).map_err(|e| PipelineError::stage(stage, format!("{}: {e}", path.display())))
}

/// Reads scores in the pair-scores format or from any external model.
pub fn load_scores(stage: &'static str, path: &Path) -> Result<Vec<PairScore>, PipelineError> {
    let imported = import_external_scores(open(stage, path)?)
        .map_err(|e| PipelineError::input(stage, format!("{}: {e}", path.display())))?;
    if !imported.rejected.is_empty() {
        log::warn!("{}: rejected {} score rows", path.display(), imported.rejected.len());
    }
    Ok(imported.scores)
}

/// Non-empty bins and their pedestrians.
pub fn members_by_bin(bins: &[TimeBin]) -> BTreeMap<usize, Vec<Pid>> {
    bins.iter().filter(|b| !b.windows.is_empty()).map(|b| (b.bin_index, b.pids())).collect()
}

pub fn detect_stage(
    members: &BTreeMap<usize, Vec<Pid>>,
    scores: &[PairScore],
    threshold: f64,
) -> Result<(Vec<FlockAssignment>, FlockSummaryReport), PipelineError> {
    let assignments = detect_flocks(members, scores, threshold).map_err(|e| PipelineError::stage("detect", e.to_string()))?;
    let summary = flock_summary(&assignments);
    Ok((assignments, summary))
}

pub fn validate_stage(assignments: &[FlockAssignment], annotations: &[GroupAnnotation]) -> ValidationReport {
    validate_assignment(assignments, &annotation_pair_set(annotations))
}
