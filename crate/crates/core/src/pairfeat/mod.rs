//! The six pairwise descriptors computed between two windows of the same bin.

mod dtw;
mod io;

pub use dtw::dtw;
pub use io::{read_features, write_features, FeatureFile, FeatureMeta};

use crate::binning::{TimeBin, TrajectoryWindow};
use crate::geom::{angle_separation, circular_mean, Point2};
use crate::{Pid, PidPair};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("window lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("window is empty")]
    EmptyWindow,
    #[error("pedestrian {0} has no defined mean {1} direction")]
    UndefinedDirection(Pid, &'static str),
}

/// How the accumulated DTW cost is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtwConvention {
    /// Raw accumulated cost of the optimal path.
    #[default]
    Accumulated,
    /// Accumulated cost divided by `len_a + len_b`.
    CombinedLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub dtw: DtwConvention,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFeatures {
    pub mean_inter_distance_mm: f64,
    pub start_time_diff_s: f64,
    pub mean_speed_diff_mm_s: f64,
    pub motion_angle_diff_rad: f64,
    pub facing_angle_diff_rad: f64,
    pub dtw_distance_mm: f64,
}

impl PairFeatures {
    pub const COUNT: usize = 6;
    pub const NAMES: [&'static str; 6] = [
        "mean_inter_distance_mm",
        "start_time_diff_s",
        "mean_speed_diff_mm_s",
        "motion_angle_diff_rad",
        "facing_angle_diff_rad",
        "dtw_distance_mm",
    ];

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.mean_inter_distance_mm,
            self.start_time_diff_s,
            self.mean_speed_diff_mm_s,
            self.motion_angle_diff_rad,
            self.facing_angle_diff_rad,
            self.dtw_distance_mm,
        ]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            mean_inter_distance_mm: v[0],
            start_time_diff_s: v[1],
            mean_speed_diff_mm_s: v[2],
            motion_angle_diff_rad: v[3],
            facing_angle_diff_rad: v[4],
            dtw_distance_mm: v[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

fn same_len(wa: &TrajectoryWindow, wb: &TrajectoryWindow) -> Result<usize, FeatureError> {
    match (wa.len(), wb.len()) {
        (0, _) | (_, 0) => Err(FeatureError::EmptyWindow),
        (a, b) if a != b => Err(FeatureError::LengthMismatch(a, b)),
        (a, _) => Ok(a),
    }
}

fn positions(w: &TrajectoryWindow) -> Vec<Point2> {
    w.samples.iter().map(|s| s.position()).collect()
}

/// Mean index-aligned Euclidean distance.
pub fn mean_inter_distance(wa: &TrajectoryWindow, wb: &TrajectoryWindow) -> Result<f64, FeatureError> {
    let n = same_len(wa, wb)?;
    let sum: f64 = wa
        .samples
        .iter()
        .zip(&wb.samples)
        .map(|(a, b)| a.position().distance(b.position()))
        .sum();
    Ok(sum / n as f64)
}

/// Offset between the first sample timestamps, in seconds.
pub fn start_time_diff(wa: &TrajectoryWindow, wb: &TrajectoryWindow) -> f64 {
    (wa.start_ms() - wb.start_ms()).abs() as f64 / 1000.0
}

fn mean_speed(w: &TrajectoryWindow) -> f64 {
    w.samples.iter().map(|s| s.speed_mm_s).sum::<f64>() / w.len() as f64
}

pub fn mean_speed_diff(wa: &TrajectoryWindow, wb: &TrajectoryWindow) -> Result<f64, FeatureError> {
    same_len(wa, wb)?;
    Ok((mean_speed(wa) - mean_speed(wb)).abs())
}

fn angle_diff(
    wa: &TrajectoryWindow,
    wb: &TrajectoryWindow,
    field: fn(&crate::ingest::TrajectoryPoint) -> f64,
    what: &'static str,
) -> Result<f64, FeatureError> {
    same_len(wa, wb)?;
    let mean = |w: &TrajectoryWindow| {
        circular_mean(w.samples.iter().map(field)).ok_or(FeatureError::UndefinedDirection(w.pid, what))
    };
    Ok(angle_separation(mean(wa)?, mean(wb)?))
}

/// Separation of the circular-mean motion directions, in `[0, π]`.
pub fn motion_angle_diff(wa: &TrajectoryWindow, wb: &TrajectoryWindow) -> Result<f64, FeatureError> {
    angle_diff(wa, wb, |s| s.motion_angle_rad, "motion")
}

/// Separation of the circular-mean facing directions, in `[0, π]`.
pub fn facing_angle_diff(wa: &TrajectoryWindow, wb: &TrajectoryWindow) -> Result<f64, FeatureError> {
    angle_diff(wa, wb, |s| s.facing_angle_rad, "facing")
}

pub fn dtw_distance(
    wa: &TrajectoryWindow,
    wb: &TrajectoryWindow,
    convention: DtwConvention,
) -> Result<f64, FeatureError> {
    let d = dtw(&positions(wa), &positions(wb)).ok_or(FeatureError::EmptyWindow)?;
    Ok(match convention {
        DtwConvention::Accumulated => d,
        DtwConvention::CombinedLength => d / (wa.len() + wb.len()) as f64,
    })
}

pub fn extract_pair_features(
    wa: &TrajectoryWindow,
    wb: &TrajectoryWindow,
    config: &FeatureConfig,
) -> Result<PairFeatures, FeatureError> {
    Ok(PairFeatures {
        mean_inter_distance_mm: mean_inter_distance(wa, wb)?,
        start_time_diff_s: start_time_diff(wa, wb),
        mean_speed_diff_mm_s: mean_speed_diff(wa, wb)?,
        motion_angle_diff_rad: motion_angle_diff(wa, wb)?,
        facing_angle_diff_rad: facing_angle_diff(wa, wb)?,
        dtw_distance_mm: dtw_distance(wa, wb, config.dtw)?,
    })
}

/// Features of one within-bin pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub bin_index: usize,
    pub pair: PidPair,
    pub features: PairFeatures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPair {
    pub bin_index: usize,
    pub pair: PidPair,
    pub error: FeatureError,
}

#[derive(Debug, Clone, Default)]
pub struct PairFeatureTable {
    /// Ordered by bin, then pair.
    pub rows: Vec<PairRecord>,
    pub skipped: Vec<SkippedPair>,
}

/// All unordered window pairs of one bin.
pub fn bin_pair_features(bin: &TimeBin, config: &FeatureConfig) -> PairFeatureTable {
    let mut windows: Vec<&TrajectoryWindow> = bin.windows.iter().collect();
    windows.sort_by_key(|w| w.pid);
    let mut table = PairFeatureTable::default();
    for (i, wa) in windows.iter().enumerate() {
        for wb in &windows[i + 1..] {
            let Some(pair) = PidPair::new(wa.pid, wb.pid) else {
                continue;
            };
            match extract_pair_features(wa, wb, config) {
                Ok(features) => table.rows.push(PairRecord { bin_index: bin.bin_index, pair, features }),
                Err(error) => table.skipped.push(SkippedPair { bin_index: bin.bin_index, pair, error }),
            }
        }
    }
    table
}

/// [`bin_pair_features`] over every bin, computed in parallel, merged by bin index.
pub fn extract_all_pairs(bins: &[TimeBin], config: &FeatureConfig) -> PairFeatureTable {
    let per_bin: Vec<PairFeatureTable> = bins.par_iter().map(|b| bin_pair_features(b, config)).collect();
    let mut out = PairFeatureTable::default();
    for t in per_bin {
        out.rows.extend(t.rows);
        out.skipped.extend(t.skipped);
    }
    for s in &out.skipped {
        log::warn!("bin {} pair {}: {}", s.bin_index, s.pair, s.error);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TrajectoryPoint;
    use std::f64::consts::PI;

    pub(crate) fn window(pid: Pid, t0: i64, pts: &[(f64, f64)], speed: f64, heading: f64) -> TrajectoryWindow {
        TrajectoryWindow {
            pid,
            bin_index: 0,
            samples: pts
                .iter()
                .enumerate()
                .map(|(k, &(x, y))| TrajectoryPoint {
                    t_ms: t0 + (k as f64 * 1000.0 / 3.0).round() as i64,
                    x_mm: x,
                    y_mm: y,
                    speed_mm_s: speed,
                    motion_angle_rad: heading,
                    facing_angle_rad: heading,
                })
                .collect(),
            rate_hz: 3.0,
        }
    }

    fn straight(pid: Pid, y: f64, dir: f64, speed: f64, n: usize) -> TrajectoryWindow {
        let step = speed / 3.0 * dir;
        let pts: Vec<(f64, f64)> = (0..n).map(|k| (10_000.0 + k as f64 * step, y)).collect();
        window(pid, 0, &pts, speed, if dir > 0.0 { 0.0 } else { PI })
    }

    #[test]
    fn identical_windows_give_all_zero() {
        let w = straight(1, 0.0, 1.0, 1200.0, 20);
        let f = extract_pair_features(&w, &w, &FeatureConfig::default()).unwrap();
        assert_eq!(f.to_array(), [0.0; 6]);
    }

    #[test]
    fn parallel_offset() {
        let a = straight(1, 0.0, 1.0, 1200.0, 20);
        let b = straight(2, 800.0, 1.0, 1200.0, 20);
        assert!((mean_inter_distance(&a, &b).unwrap() - 800.0).abs() < 1e-9);
        assert_eq!(motion_angle_diff(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn time_offsets() {
        let a = window(1, 0, &[(0.0, 0.0)], 0.0, 0.0);
        let b = window(2, 2500, &[(0.0, 0.0)], 0.0, 0.0);
        assert_eq!(start_time_diff(&a, &a), 0.0);
        assert_eq!(start_time_diff(&a, &b), 2.5);
        assert_eq!(start_time_diff(&b, &a), 2.5);
    }

    #[test]
    fn speed_difference() {
        let a = straight(1, 0.0, 1.0, 1200.0, 10);
        let b = straight(2, 0.0, 1.0, 1500.0, 10);
        assert_eq!(mean_speed_diff(&a, &a).unwrap(), 0.0);
        assert!((mean_speed_diff(&a, &b).unwrap() - 300.0).abs() < 1e-9);
    }

    #[test]
    fn heading_differences() {
        let east = straight(1, 0.0, 1.0, 1200.0, 5);
        let west = straight(2, 0.0, -1.0, 1200.0, 5);
        assert_eq!(motion_angle_diff(&east, &east).unwrap(), 0.0);
        assert!((motion_angle_diff(&east, &west).unwrap() - PI).abs() < 1e-12);
        let a = window(1, 0, &[(0.0, 0.0); 4], 0.0, 3.1);
        let b = window(2, 0, &[(0.0, 0.0); 4], 0.0, -3.1);
        let d = facing_angle_diff(&a, &b).unwrap();
        assert!((d - (2.0 * PI - 6.2)).abs() < 1e-9, "{d}");
    }

    #[test]
    fn cancelling_headings_are_flagged() {
        let mut w = window(4, 0, &[(0.0, 0.0); 2], 0.0, 0.0);
        w.samples[1].motion_angle_rad = PI;
        let other = window(5, 0, &[(0.0, 0.0); 2], 0.0, 0.0);
        assert_eq!(
            motion_angle_diff(&w, &other),
            Err(FeatureError::UndefinedDirection(4, "motion"))
        );
    }

    #[test]
    fn mismatched_lengths_are_errors() {
        let a = straight(1, 0.0, 1.0, 1200.0, 5);
        let b = straight(2, 0.0, 1.0, 1200.0, 6);
        assert_eq!(mean_inter_distance(&a, &b), Err(FeatureError::LengthMismatch(5, 6)));
        assert!(extract_pair_features(&a, &b, &FeatureConfig::default()).is_err());
    }

    #[test]
    fn planted_pair_dominates_opposing_pair() {
        let a = straight(1, 0.0, 1.0, 1300.0, 30);
        let mut b = straight(2, 600.0, 1.0, 1300.0, 30);
        for s in &mut b.samples {
            s.facing_angle_rad = 0.2;
            s.speed_mm_s = 1310.0;
        }
        let c = {
            let mut w = straight(3, 2000.0, -1.0, 1000.0, 30);
            for s in &mut w.samples {
                s.t_ms += 4000;
                s.x_mm += 30_000.0;
            }
            w
        };
        let cfg = FeatureConfig::default();
        let planted = extract_pair_features(&a, &b, &cfg).unwrap().to_array();
        let opposing = extract_pair_features(&a, &c, &cfg).unwrap().to_array();
        for (k, (p, o)) in planted.iter().zip(&opposing).enumerate() {
            assert!(p < o, "{}: {p} !< {o}", PairFeatures::NAMES[k]);
        }
    }

    #[test]
    fn bin_pairs_are_canonical() {
        let bin = TimeBin {
            bin_index: 2,
            t_start_ms: 0,
            t_end_ms: 60_000,
            windows: vec![
                straight(9, 0.0, 1.0, 1200.0, 6),
                straight(3, 500.0, 1.0, 1200.0, 6),
                straight(5, 900.0, -1.0, 1200.0, 6),
            ],
        };
        let t = bin_pair_features(&bin, &FeatureConfig::default());
        let pairs: Vec<(Pid, Pid)> = t.rows.iter().map(|r| (r.pair.first(), r.pair.second())).collect();
        assert_eq!(pairs, vec![(3, 5), (3, 9), (5, 9)]);
        assert!(t.rows.iter().all(|r| r.bin_index == 2));
    }
}
