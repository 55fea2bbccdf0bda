use crate::binning::{sample_at, sample_time_ms, TimeBin};
use crate::geom::Point2;
use crate::Pid;
use std::collections::BTreeMap;

/// Kinematic state of one pedestrian at one scene frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample {
    pub position: Point2,
    pub speed_mm_s: f64,
    pub heading_rad: f64,
}

/// All windows of a bin interpolated onto one clock that starts at the bin
/// start and ticks at the bin's sampling rate.
///
/// A pedestrian is present at a frame when the frame time lies within its
/// window's observed span.
#[derive(Debug, Clone)]
pub struct BinScene {
    pub bin_index: usize,
    pub frame_times_ms: Vec<i64>,
    tracks: BTreeMap<Pid, Vec<Option<FrameSample>>>,
}

impl BinScene {
    pub fn from_bin(bin: &TimeBin) -> Self {
        let rate = bin.windows.first().map_or(3.0, |w| w.rate_hz);
        let last = bin.windows.iter().filter_map(|w| w.samples.last()).map(|s| s.t_ms).max();
        let mut frame_times_ms = Vec::new();
        if let Some(last) = last {
            for k in 0.. {
                let t = sample_time_ms(bin.t_start_ms, k, rate);
                if t > last {
                    break;
                }
                frame_times_ms.push(t);
            }
        }
        let tracks = bin
            .windows
            .iter()
            .map(|w| {
                let track = frame_times_ms
                    .iter()
                    .map(|&t| {
                        sample_at(&w.samples, t).map(|s| FrameSample {
                            position: s.position(),
                            speed_mm_s: s.speed_mm_s,
                            heading_rad: s.motion_angle_rad,
                        })
                    })
                    .collect();
                (w.pid, track)
            })
            .collect();
        Self { bin_index: bin.bin_index, frame_times_ms, tracks }
    }

    pub fn frames(&self) -> usize {
        self.frame_times_ms.len()
    }

    pub fn pids(&self) -> impl Iterator<Item = Pid> + '_ {
        self.tracks.keys().copied()
    }

    pub fn contains(&self, pid: Pid) -> bool {
        self.tracks.contains_key(&pid)
    }

    pub fn sample(&self, pid: Pid, frame: usize) -> Option<FrameSample> {
        self.tracks.get(&pid)?.get(frame).copied().flatten()
    }

    /// Distance to the nearest other pedestrian present at `frame`.
    /// `None` when `pid` is absent or alone.
    pub fn clearance_radius(&self, pid: Pid, frame: usize) -> Option<f64> {
        let me = self.sample(pid, frame)?.position;
        self.tracks
            .iter()
            .filter(|(&other, _)| other != pid)
            .filter_map(|(_, tr)| tr.get(frame).copied().flatten())
            .map(|s| s.position.distance(me))
            .min_by(f64::total_cmp)
    }

    /// Mean clearance of `pid` over the frames where it is defined.
    pub fn mean_clearance(&self, pid: Pid) -> Option<f64> {
        let vals: Vec<f64> = (0..self.frames()).filter_map(|f| self.clearance_radius(pid, f)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}
