use super::{IngestError, Trajectory};
use serde::{Deserialize, Serialize};

/// Record counts and timing of a tracking dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub agents: usize,
    pub total_records: usize,
    pub min_records_per_agent: usize,
    pub max_records_per_agent: usize,
    pub mean_records_per_agent: f64,
    /// Pooled over every consecutive pair of samples of every agent.
    pub mean_interval_s: f64,
    pub duration_h: f64,
}

pub fn summarize_dataset<'a, I>(trajectories: I) -> Result<DatasetSummary, IngestError>
where
    I: IntoIterator<Item = &'a Trajectory>,
{
    let mut agents = 0usize;
    let mut total = 0usize;
    let mut min_n = usize::MAX;
    let mut max_n = 0usize;
    let mut span_sum_ms = 0i128;
    let mut intervals = 0usize;
    let mut t_lo = i64::MAX;
    let mut t_hi = i64::MIN;

    for tr in trajectories {
        let (Some(first), Some(last)) = (tr.first_t_ms(), tr.last_t_ms()) else {
            continue;
        };
        let n = tr.points.len();
        agents += 1;
        total += n;
        min_n = min_n.min(n);
        max_n = max_n.max(n);
        span_sum_ms += i128::from(last - first);
        intervals += n - 1;
        t_lo = t_lo.min(first);
        t_hi = t_hi.max(last);
    }
    if agents == 0 {
        return Err(IngestError::EmptyDataset);
    }
    Ok(DatasetSummary {
        agents,
        total_records: total,
        min_records_per_agent: min_n,
        max_records_per_agent: max_n,
        mean_records_per_agent: total as f64 / agents as f64,
        mean_interval_s: if intervals == 0 {
            0.0
        } else {
            span_sum_ms as f64 / intervals as f64 / 1000.0
        },
        duration_h: (t_hi - t_lo) as f64 / 3_600_000.0,
    })
}
