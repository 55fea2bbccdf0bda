//! Space-use and interaction metrics over flock assignments.
//!
//! Spatial: convex hull area, smallest enclosing circle and a grid heatmap.
//! Behavioural: straightness, clearance, and proximity encounters between
//! subjects (flocks as units, plus singles) with speed and heading changes
//! around the closest approach.

mod encounters;
mod report;
mod scene;
mod spatial;
mod stats;

pub use encounters::{
    detect_encounters, heading_change, speed_change, subject_distance, subjects_for, EncounterConfig,
    EncounterEvent, EncounterType, Subject, SubjectKind,
};
pub use report::{
    analyze_bins, subject_footprint, write_analysis, AnalysisReport, MetricsConfig, SpatialFootprint,
};
pub use scene::{BinScene, FrameSample};
pub use spatial::{
    accumulate_heatmap, convex_hull, convex_hull_area, smallest_enclosing_circle, trajectory_straightness,
    Circle, HeatmapGrid, Straightness,
};
pub use stats::{ecdf, groupsize_distance_regression, interaction_timeline, ols, Regression, TimelineRow, MINUTE_MS};

use crate::Pid;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("heatmap cell size must be a positive finite number of mm, got {0}")]
    InvalidCellSize(f64),
    #[error("invalid metric parameter: {0}")]
    InvalidParameter(String),
    #[error("bin {bin}: assigned pid {pid} has no window in the bin")]
    UnknownPid { bin: usize, pid: Pid },
    #[error("assignment refers to bin {0}, which is not in the bins file")]
    MissingBin(usize),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
