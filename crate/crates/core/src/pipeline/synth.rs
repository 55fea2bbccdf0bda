//! Corridor walkers with planted groups, for tests and demos.

use crate::geom::Point2;
use crate::ingest::{write_tracking_csv, EnvironmentGeometry, GroupAnnotation, Pillar, Trajectory, TrajectoryPoint};
use crate::seeding::{stage, stage_rng};
use crate::Pid;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("pid {0} is used more than once")]
    DuplicatePid(Pid),
    #[error("a group needs at least 2 members, got {0}")]
    GroupTooSmall(usize),
    #[error("invalid scenario parameter: {0}")]
    InvalidParameter(String),
}

/// Direction of travel along the corridor's long axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    East,
    West,
}

/// One unit walking the corridor end to end at constant velocity: a single
/// (one pid) or a group whose members hold fixed lateral offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerSpec {
    pub pids: Vec<Pid>,
    /// Entry time relative to the scenario start.
    pub entry_ms: i64,
    pub speed_mm_s: f64,
    pub direction: Direction,
    /// Lateral position of the first member.
    pub lane_y_mm: f64,
    /// Lateral spacing between consecutive members.
    pub offset_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub corridor_length_mm: f64,
    pub corridor_width_mm: f64,
    /// Epoch milliseconds of scenario time 0.
    pub start_ms: i64,
    /// Raw tracker sampling interval.
    pub sample_interval_ms: i64,
    /// Standard deviation of the Gaussian noise added to every x and y.
    pub noise_sigma_mm: f64,
    pub walkers: Vec<WalkerSpec>,
}

/// Knobs of the planted-pairs preset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedParams {
    pub pairs: usize,
    pub singles: usize,
    pub offset_mm: f64,
    pub noise_sigma_mm: f64,
    /// Gap between consecutive entries.
    pub entry_gap_ms: i64,
}

impl Default for PlantedParams {
    fn default() -> Self {
        Self { pairs: 8, singles: 24, offset_mm: 600.0, noise_sigma_mm: 50.0, entry_gap_ms: 3500 }
    }
}

impl ScenarioSpec {
    /// `pairs` two-person groups and `singles` lone walkers entering one after
    /// another in a 55 m by 5 m corridor, alternating direction, with speeds
    /// and lanes drawn from `seed`. Pair members share speed and entry time.
    pub fn planted(params: &PlantedParams, seed: u64) -> Self {
        let mut rng = stage_rng(seed, stage::SYNTHETIC);
        let mut kinds: Vec<bool> = std::iter::repeat_n(true, params.pairs)
            .chain(std::iter::repeat_n(false, params.singles))
            .collect();
        kinds.shuffle(&mut rng);
        let width = 5000.0;
        let mut next_pid: Pid = 1;
        let walkers = kinds
            .into_iter()
            .enumerate()
            .map(|(k, is_pair)| {
                let n = if is_pair { 2 } else { 1 };
                let pids: Vec<Pid> = (next_pid..next_pid + n).collect();
                next_pid += n;
                let span = if is_pair { params.offset_mm } else { 0.0 };
                let margin = 500.0;
                let lane_y_mm = rng.random_range(margin..=(width - margin - span).max(margin));
                WalkerSpec {
                    pids,
                    entry_ms: k as i64 * params.entry_gap_ms,
                    speed_mm_s: rng.random_range(1000.0..1500.0),
                    direction: if k % 2 == 0 { Direction::East } else { Direction::West },
                    lane_y_mm,
                    offset_mm: params.offset_mm,
                }
            })
            .collect();
        ScenarioSpec {
            corridor_length_mm: 55_000.0,
            corridor_width_mm: width,
            start_ms: 1_365_994_800_000,
            sample_interval_ms: 100,
            noise_sigma_mm: params.noise_sigma_mm,
            walkers,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidParameter(m.to_string()));
        if !(self.corridor_length_mm > 0.0 && self.corridor_width_mm > 0.0) {
            return bad("corridor dimensions must be positive");
        }
        if self.sample_interval_ms <= 0 {
            return bad("sample_interval_ms must be positive");
        }
        if !(self.noise_sigma_mm >= 0.0 && self.noise_sigma_mm.is_finite()) {
            return bad("noise_sigma_mm must be >= 0");
        }
        let mut seen = BTreeSet::new();
        for w in &self.walkers {
            if w.pids.is_empty() {
                return Err(SynthError::GroupTooSmall(0));
            }
            if !(w.speed_mm_s > 0.0 && w.speed_mm_s.is_finite()) {
                return bad("walker speed must be positive");
            }
            for &p in &w.pids {
                if !seen.insert(p) {
                    return Err(SynthError::DuplicatePid(p));
                }
            }
        }
        Ok(())
    }
}

/// Generated tracks, the matching annotations and the corridor geometry.
#[derive(Debug, Clone)]
pub struct SyntheticScenario {
    pub trajectories: BTreeMap<Pid, Trajectory>,
    pub annotations: Vec<GroupAnnotation>,
    pub geometry: EnvironmentGeometry,
}

impl SyntheticScenario {
    pub fn agents(&self) -> usize {
        self.trajectories.len()
    }

    pub fn groups(&self) -> usize {
        let mut seen = BTreeSet::new();
        self.annotations
            .iter()
            .filter(|a| {
                let mut members = a.partner_ids.clone();
                members.push(a.pid);
                members.sort_unstable();
                seen.insert(members)
            })
            .count()
    }

    pub fn write_tracking<W: Write>(&self, w: W) -> io::Result<()> {
        write_tracking_csv(w, self.trajectories.values())
    }

    /// Space-separated `pid size partners...`, one row per group member.
    pub fn write_groups<W: Write>(&self, mut w: W) -> io::Result<()> {
        for a in &self.annotations {
            write!(w, "{} {}", a.pid, a.group_size)?;
            for p in &a.partner_ids {
                write!(w, " {p}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }

    pub fn write_geometry<W: Write>(&self, w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(w, &self.geometry.to_json())?;
        Ok(())
    }
}

/// Constant-velocity corridor walkers sampled every `sample_interval_ms` from
/// one end to the other, with Gaussian positional noise drawn from `seed`.
pub fn generate_synthetic_scenario(spec: &ScenarioSpec, seed: u64) -> Result<SyntheticScenario, SynthError> {
    spec.validate()?;
    let noise = Normal::new(0.0, spec.noise_sigma_mm).map_err(|e| SynthError::InvalidParameter(e.to_string()))?;
    let mut rng = stage_rng(seed, stage::SYNTHETIC);
    let mut trajectories = BTreeMap::new();
    let mut annotations = Vec::new();
    let len = spec.corridor_length_mm;

    for w in &spec.walkers {
        let (x0, sign, heading) = match w.direction {
            Direction::East => (0.0, 1.0, 0.0),
            Direction::West => (len, -1.0, PI),
        };
        let duration_ms = (len / w.speed_mm_s * 1000.0).floor() as i64;
        for (m, &pid) in w.pids.iter().enumerate() {
            let y = w.lane_y_mm + m as f64 * w.offset_mm;
            let mut points = Vec::new();
            let mut t = 0;
            while t <= duration_ms {
                let x = x0 + sign * w.speed_mm_s * t as f64 / 1000.0;
                let (dx, dy) = if spec.noise_sigma_mm > 0.0 {
                    (noise.sample(&mut rng), noise.sample(&mut rng))
                } else {
                    (0.0, 0.0)
                };
                points.push(TrajectoryPoint {
                    t_ms: spec.start_ms + w.entry_ms + t,
                    x_mm: x + dx,
                    y_mm: y + dy,
                    speed_mm_s: w.speed_mm_s,
                    motion_angle_rad: heading,
                    facing_angle_rad: heading,
                });
                t += spec.sample_interval_ms;
            }
            trajectories.insert(pid, Trajectory { pid, points });
        }
        if w.pids.len() >= 2 {
            for &pid in &w.pids {
                annotations.push(GroupAnnotation {
                    pid,
                    group_size: w.pids.len(),
                    partner_ids: w.pids.iter().copied().filter(|&p| p != pid).collect(),
                });
            }
        }
    }

    let margin = 1000.0;
    let geometry = EnvironmentGeometry::new(
        vec![
            Point2::new(-margin, -margin),
            Point2::new(len + margin, -margin),
            Point2::new(len + margin, spec.corridor_width_mm + margin),
            Point2::new(-margin, spec.corridor_width_mm + margin),
        ],
        vec![Pillar { center: Point2::new(len / 2.0, -margin / 2.0), radius_mm: 300.0 }],
        vec![],
    )
    .map_err(|e| SynthError::InvalidParameter(e.to_string()))?;
    Ok(SyntheticScenario { trajectories, annotations, geometry })
}
