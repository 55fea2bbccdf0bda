//! Uniform resampling, start-time binning and minimum-length filtering.
//!
//! Every trajectory is resampled onto its own uniform clock (starting at its
//! first observed timestamp), assigned to exactly one bin by that start time,
//! and, if it yields at least `L` samples, cut down to its first `L` samples.

mod io;

pub use io::{read_bins, write_bins, BinsFile};

use crate::geom::{shortest_arc, wrap_angle};
use crate::ingest::{Trajectory, TrajectoryPoint};
use crate::Pid;
use serde::{Deserialize, Serialize};

/// Resampled samples of one pedestrian inside one bin.
///
/// After [`filter_min_length`] every window holds exactly `L` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryWindow {
    pub pid: Pid,
    pub bin_index: usize,
    pub samples: Vec<TrajectoryPoint>,
    pub rate_hz: f64,
}

impl TrajectoryWindow {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start_ms(&self) -> i64 {
        self.samples.first().map_or(0, |s| s.t_ms)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeBin {
    pub bin_index: usize,
    pub t_start_ms: i64,
    pub t_end_ms: i64,
    /// Sorted by pid.
    pub windows: Vec<TrajectoryWindow>,
}

impl TimeBin {
    pub fn pids(&self) -> Vec<Pid> {
        self.windows.iter().map(|w| w.pid).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningConfig {
    pub interval_ms: i64,
    pub rate_hz: f64,
    pub seq_len: usize,
}

impl Default for BinningConfig {
    fn default() -> Self {
        Self {
            interval_ms: 60_000,
            rate_hz: 3.0,
            seq_len: 60,
        }
    }
}

fn lerp(a: f64, b: f64, f: f64) -> f64 {
    a + f * (b - a)
}

fn interpolate(a: &TrajectoryPoint, b: &TrajectoryPoint, t_ms: i64) -> TrajectoryPoint {
    let f = (t_ms - a.t_ms) as f64 / (b.t_ms - a.t_ms) as f64;
    TrajectoryPoint {
        t_ms,
        x_mm: lerp(a.x_mm, b.x_mm, f),
        y_mm: lerp(a.y_mm, b.y_mm, f),
        speed_mm_s: lerp(a.speed_mm_s, b.speed_mm_s, f),
        motion_angle_rad: wrap_angle(
            a.motion_angle_rad + f * shortest_arc(a.motion_angle_rad, b.motion_angle_rad),
        ),
        facing_angle_rad: wrap_angle(
            a.facing_angle_rad + f * shortest_arc(a.facing_angle_rad, b.facing_angle_rad),
        ),
    }
}

/// State at `t_ms`, interpolated between the bracketing samples of a
/// time-sorted sequence. `None` outside the observed span.
pub fn sample_at(points: &[TrajectoryPoint], t_ms: i64) -> Option<TrajectoryPoint> {
    let i = points.partition_point(|p| p.t_ms <= t_ms);
    let a = points.get(i.checked_sub(1)?)?;
    if a.t_ms == t_ms {
        return Some(*a);
    }
    Some(interpolate(a, points.get(i)?, t_ms))
}

/// Timestamp of the `k`-th sample of a uniform clock that starts at `t0_ms`.
pub fn sample_time_ms(t0_ms: i64, k: usize, rate_hz: f64) -> i64 {
    t0_ms + (k as f64 * 1000.0 / rate_hz).round() as i64
}

/// Resamples onto `t0, t0 + 1/rate, ...` up to the last observed timestamp.
///
/// Positions and speed are interpolated linearly, angles along the shorter
/// arc. Returns `None` when fewer than two samples fit in the observed span.
pub fn resample_uniform(trajectory: &Trajectory, rate_hz: f64) -> Option<Trajectory> {
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return None;
    }
    let pts = &trajectory.points;
    let (first, last) = (pts.first()?, pts.last()?);
    let mut out = Vec::new();
    let mut seg = 0usize;
    for k in 0.. {
        let t = sample_time_ms(first.t_ms, k, rate_hz);
        if t > last.t_ms {
            break;
        }
        while seg + 1 < pts.len() && pts[seg + 1].t_ms <= t {
            seg += 1;
        }
        let s = if pts[seg].t_ms == t {
            TrajectoryPoint { t_ms: t, ..pts[seg] }
        } else {
            interpolate(&pts[seg], &pts[seg + 1], t)
        };
        out.push(s);
    }
    (out.len() >= 2).then(|| Trajectory {
        pid: trajectory.pid,
        points: out,
    })
}

/// Groups trajectories into `interval_ms` bins keyed on their first timestamp,
/// with the earliest first timestamp as bin origin.
pub fn assign_bins<I>(trajectories: I, interval_ms: i64, rate_hz: f64) -> Vec<TimeBin>
where
    I: IntoIterator<Item = Trajectory>,
{
    let trajectories: Vec<Trajectory> = trajectories.into_iter().collect();
    let Some(origin) = trajectories.iter().filter_map(Trajectory::first_t_ms).min() else {
        return Vec::new();
    };
    assign_bins_from(trajectories, interval_ms, rate_hz, origin)
}

/// [`assign_bins`] with an explicit origin (must not exceed any start time).
pub fn assign_bins_from<I>(trajectories: I, interval_ms: i64, rate_hz: f64, origin_ms: i64) -> Vec<TimeBin>
where
    I: IntoIterator<Item = Trajectory>,
{
    assert!(interval_ms > 0, "bin interval must be positive");
    let mut placed: Vec<(usize, Trajectory)> = trajectories
        .into_iter()
        .filter_map(|tr| {
            let start = tr.first_t_ms()?;
            let idx = (start - origin_ms).div_euclid(interval_ms);
            assert!(idx >= 0, "trajectory {} starts before the bin origin", tr.pid);
            Some((idx as usize, tr))
        })
        .collect();
    let Some(max_idx) = placed.iter().map(|(i, _)| *i).max() else {
        return Vec::new();
    };
    placed.sort_by_key(|(i, tr)| (*i, tr.pid));
    let mut bins = empty_bins(max_idx + 1, interval_ms, origin_ms);
    for (idx, tr) in placed {
        bins[idx].windows.push(TrajectoryWindow {
            pid: tr.pid,
            bin_index: idx,
            samples: tr.points,
            rate_hz,
        });
    }
    bins
}

pub(crate) fn empty_bins(n: usize, interval_ms: i64, origin_ms: i64) -> Vec<TimeBin> {
    (0..n)
        .map(|i| {
            let t_start_ms = origin_ms + i as i64 * interval_ms;
            TimeBin {
                bin_index: i,
                t_start_ms,
                t_end_ms: t_start_ms + interval_ms,
                windows: Vec::new(),
            }
        })
        .collect()
}

/// Keeps windows with at least `len` samples, truncated to their first `len`.
pub fn filter_min_length(mut bin: TimeBin, len: usize) -> TimeBin {
    bin.windows.retain(|w| w.samples.len() >= len);
    for w in &mut bin.windows {
        w.samples.truncate(len);
    }
    bin
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStatsReport {
    pub bins: usize,
    pub non_empty_bins: usize,
    pub total_agents: usize,
    pub min_agents_per_bin: Option<usize>,
    pub max_agents_per_bin: Option<usize>,
    /// Mean over non-empty bins.
    pub mean_agents_per_bin: Option<f64>,
}

pub fn bin_stats(bins: &[TimeBin]) -> BinStatsReport {
    let counts: Vec<usize> = bins.iter().map(|b| b.windows.len()).filter(|&n| n > 0).collect();
    let total: usize = counts.iter().sum();
    BinStatsReport {
        bins: bins.len(),
        non_empty_bins: counts.len(),
        total_agents: total,
        min_agents_per_bin: counts.iter().copied().min(),
        max_agents_per_bin: counts.iter().copied().max(),
        mean_agents_per_bin: (!counts.is_empty()).then(|| total as f64 / counts.len() as f64),
    }
}

/// Result of [`prepare_bins`].
#[derive(Debug, Clone)]
pub struct PreparedBins {
    pub config: BinningConfig,
    pub origin_ms: i64,
    pub bins: Vec<TimeBin>,
    /// Trajectories whose span could not produce two resampled points.
    pub unresampleable: usize,
    /// Trajectories that resampled but fell short of `seq_len`.
    pub too_short: usize,
}

/// Resample, bin and length-filter in one go. The bin origin is taken from the
/// input before resampling, so dropped trajectories still anchor the grid.
pub fn prepare_bins<'a, I>(trajectories: I, config: &BinningConfig) -> PreparedBins
where
    I: IntoIterator<Item = &'a Trajectory>,
{
    let input: Vec<&Trajectory> = trajectories.into_iter().collect();
    let origin_ms = input.iter().filter_map(|t| t.first_t_ms()).min().unwrap_or(0);
    let resampled: Vec<Trajectory> = input
        .iter()
        .filter_map(|t| resample_uniform(t, config.rate_hz))
        .collect();
    let unresampleable = input.len() - resampled.len();
    let n_resampled = resampled.len();
    let bins: Vec<TimeBin> = assign_bins_from(resampled, config.interval_ms, config.rate_hz, origin_ms)
        .into_iter()
        .map(|b| filter_min_length(b, config.seq_len))
        .collect();
    let kept: usize = bins.iter().map(|b| b.windows.len()).sum();
    PreparedBins {
        config: *config,
        origin_ms,
        bins,
        unresampleable,
        too_short: n_resampled - kept,
    }
}
