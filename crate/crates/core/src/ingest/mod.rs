//! Reading tracking records, group annotations and environment geometry.

mod environment;
mod groups;
mod summary;
mod tracking;

pub use environment::{
    filter_to_boundary, parse_environment, EnvironmentGeometry, FilterReport, Pillar, Spot,
};
pub use groups::{
    annotation_pair_set, find_asymmetries, parse_group_annotations, AnnotationParse, Asymmetry,
    GroupAnnotation, SkippedRow,
};
pub use summary::{summarize_dataset, DatasetSummary};
pub use tracking::{
    parse_timestamp_ms, parse_tracking_csv, write_tracking_csv, Trajectory, TrajectoryPoint,
    TrackingParse,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid geometry file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("boundary polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("boundary polygon is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("boundary polygon has zero area")]
    DegenerateBoundary,
    #[error("pillar {index} has invalid radius {radius}")]
    InvalidPillar { index: usize, radius: f64 },
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("dataset is empty")]
    EmptyDataset,
}
