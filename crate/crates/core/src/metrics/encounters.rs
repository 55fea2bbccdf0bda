use super::scene::{BinScene, FrameSample};
use super::MetricsError;
use crate::flock::FlockAssignment;
use crate::geom::{angle_separation, circular_mean, Point2};
use crate::Pid;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubjectKind {
    Single,
    Group,
}

/// A single pedestrian or a whole flock, treated as one unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subject {
    pub kind: SubjectKind,
    pub flock_id: Option<usize>,
    /// Sorted ascending, never empty.
    pub members: Vec<Pid>,
}

impl Subject {
    pub fn single(pid: Pid) -> Self {
        Self { kind: SubjectKind::Single, flock_id: None, members: vec![pid] }
    }

    /// Smallest member pid; subjects are ordered by it.
    pub fn key(&self) -> Pid {
        self.members[0]
    }

    pub fn label(&self) -> String {
        match (self.kind, self.flock_id) {
            (SubjectKind::Group, Some(id)) => format!("flock:{id}"),
            _ => format!("pid:{}", self.key()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EncounterType {
    #[serde(rename = "S-S")]
    SingleSingle,
    #[serde(rename = "S-G")]
    SingleGroup,
    #[serde(rename = "G-G")]
    GroupGroup,
}

impl EncounterType {
    pub const ALL: [EncounterType; 3] = [Self::SingleSingle, Self::SingleGroup, Self::GroupGroup];

    pub fn of(a: SubjectKind, b: SubjectKind) -> Self {
        match (a, b) {
            (SubjectKind::Single, SubjectKind::Single) => Self::SingleSingle,
            (SubjectKind::Group, SubjectKind::Group) => Self::GroupGroup,
            _ => Self::SingleGroup,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SingleSingle => "S-S",
            Self::SingleGroup => "S-G",
            Self::GroupGroup => "G-G",
        }
    }
}

impl fmt::Display for EncounterType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncounterConfig {
    /// An episode opens when subjects come closer than this.
    pub d_enc_mm: f64,
    /// ...and closes once they are farther than `d_enc_mm + hysteresis_mm`.
    pub hysteresis_mm: f64,
    /// Samples on each side of the closest approach used for Δv and Δθ.
    pub window: usize,
}

impl Default for EncounterConfig {
    fn default() -> Self {
        Self { d_enc_mm: 1500.0, hysteresis_mm: 250.0, window: 15 }
    }
}

impl EncounterConfig {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(self.d_enc_mm.is_finite() && self.d_enc_mm > 0.0) {
            return Err(MetricsError::InvalidParameter(format!("d_enc_mm must be > 0, got {}", self.d_enc_mm)));
        }
        if !(self.hysteresis_mm.is_finite() && self.hysteresis_mm >= 0.0) {
            return Err(MetricsError::InvalidParameter(format!(
                "hysteresis_mm must be >= 0, got {}",
                self.hysteresis_mm
            )));
        }
        if self.window == 0 {
            return Err(MetricsError::InvalidParameter("window must be >= 1".into()));
        }
        Ok(())
    }
}

/// One proximity episode between two subjects; `a` has the smaller key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncounterEvent {
    pub bin_index: usize,
    pub kind: EncounterType,
    pub a: Subject,
    pub b: Subject,
    pub start_ms: i64,
    pub end_ms: i64,
    pub t_min_ms: i64,
    pub min_distance_mm: f64,
    /// Midpoint of the closest member pair at `t_min_ms`.
    pub location_mm: Point2,
    pub delta_v_a: Option<f64>,
    pub delta_v_b: Option<f64>,
    pub delta_theta_a: Option<f64>,
    pub delta_theta_b: Option<f64>,
    /// Size of the group side of an S-G encounter.
    pub group_size: Option<usize>,
}

/// Flocks plus singles of `assignment`, ordered by smallest member.
/// Scene pedestrians missing from the assignment are added as singles.
pub fn subjects_for(assignment: &FlockAssignment, scene: &BinScene) -> Result<Vec<Subject>, MetricsError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (id, g) in assignment.groups.iter().enumerate() {
        out.push(Subject { kind: SubjectKind::Group, flock_id: Some(id), members: g.clone() });
        seen.extend(g.iter().copied());
    }
    for &p in &assignment.singles {
        out.push(Subject::single(p));
        seen.insert(p);
    }
    if let Some(&pid) = seen.iter().find(|p| !scene.contains(**p)) {
        return Err(MetricsError::UnknownPid { bin: assignment.bin_index, pid });
    }
    out.extend(scene.pids().filter(|p| !seen.contains(p)).map(Subject::single));
    out.sort_by_key(Subject::key);
    Ok(out)
}

/// Closest member pair present at `frame`: `(distance, member of a, member of b)`.
pub fn subject_distance(scene: &BinScene, a: &Subject, b: &Subject, frame: usize) -> Option<(f64, Point2, Point2)> {
    let mut best: Option<(f64, Point2, Point2)> = None;
    for &pa in &a.members {
        let Some(sa) = scene.sample(pa, frame) else { continue };
        for &pb in &b.members {
            let Some(sb) = scene.sample(pb, frame) else { continue };
            let d = sa.position.distance(sb.position);
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, sa.position, sb.position));
            }
        }
    }
    best
}

fn pre_window(frame: usize, w: usize) -> RangeInclusive<usize> {
    frame.saturating_sub(w - 1)..=frame
}

fn post_window(frame: usize, w: usize) -> RangeInclusive<usize> {
    frame..=frame + (w - 1)
}

fn samples(scene: &BinScene, pid: Pid, frames: RangeInclusive<usize>) -> Vec<FrameSample> {
    frames.filter_map(|f| scene.sample(pid, f)).collect()
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Mean speed over the `w` frames starting at `frame` minus the mean over the
/// `w` frames ending there. Group values average the members that have
/// samples on both sides.
pub fn speed_change(scene: &BinScene, subject: &Subject, frame: usize, w: usize) -> Option<f64> {
    if w == 0 {
        return None;
    }
    mean(subject.members.iter().filter_map(|&pid| {
        let pre = mean(samples(scene, pid, pre_window(frame, w)).iter().map(|s| s.speed_mm_s))?;
        let post = mean(samples(scene, pid, post_window(frame, w)).iter().map(|s| s.speed_mm_s))?;
        Some(post - pre)
    }))
}

/// Angle between the circular-mean headings before and after `frame`, in `[0, π]`.
/// For a group the member means are combined by another circular mean.
pub fn heading_change(scene: &BinScene, subject: &Subject, frame: usize, w: usize) -> Option<f64> {
    if w == 0 {
        return None;
    }
    let sides: Vec<(f64, f64)> = subject
        .members
        .iter()
        .filter_map(|&pid| {
            let pre = circular_mean(samples(scene, pid, pre_window(frame, w)).iter().map(|s| s.heading_rad))?;
            let post = circular_mean(samples(scene, pid, post_window(frame, w)).iter().map(|s| s.heading_rad))?;
            Some((pre, post))
        })
        .collect();
    let (pre, post) = if sides.len() == 1 {
        sides[0]
    } else {
        (
            circular_mean(sides.iter().map(|s| s.0))?,
            circular_mean(sides.iter().map(|s| s.1))?,
        )
    };
    Some(angle_separation(pre, post))
}

/// All proximity episodes between every pair of subjects in the scene.
///
/// An episode opens when the subject distance drops below `d_enc_mm` and
/// closes when it rises above `d_enc_mm + hysteresis_mm` or either subject
/// leaves the scene. Events are ordered by time of closest approach, then by
/// subject keys.
pub fn detect_encounters(
    scene: &BinScene,
    subjects: &[Subject],
    cfg: &EncounterConfig,
) -> Result<Vec<EncounterEvent>, MetricsError> {
    cfg.validate()?;
    let close_at = cfg.d_enc_mm + cfg.hysteresis_mm;
    let mut events = Vec::new();
    for (i, a) in subjects.iter().enumerate() {
        for b in &subjects[i + 1..] {
            let (a, b) = if a.key() <= b.key() { (a, b) } else { (b, a) };
            // (start frame, min frame, min distance, location)
            let mut open: Option<(usize, usize, f64, Point2)> = None;
            let mut finish = |ep: (usize, usize, f64, Point2), end: usize| {
                events.push(make_event(scene, a, b, ep, end, cfg.window));
            };
            for f in 0..scene.frames() {
                let d = subject_distance(scene, a, b, f);
                match (open.as_mut(), d) {
                    (None, Some((d, pa, pb))) if d < cfg.d_enc_mm => open = Some((f, f, d, pa.midpoint(pb))),
                    (Some(ep), Some((d, pa, pb))) if d <= close_at => {
                        if d < ep.2 {
                            *ep = (ep.0, f, d, pa.midpoint(pb));
                        }
                    }
                    (Some(_), _) => finish(open.take().unwrap(), f.saturating_sub(1)),
                    (None, _) => {}
                }
            }
            if let Some(ep) = open {
                finish(ep, scene.frames().saturating_sub(1));
            }
        }
    }
    events.sort_by(|x, y| {
        (x.t_min_ms, x.a.key(), x.b.key()).cmp(&(y.t_min_ms, y.a.key(), y.b.key()))
    });
    Ok(events)
}

fn make_event(
    scene: &BinScene,
    a: &Subject,
    b: &Subject,
    (start, fmin, dmin, loc): (usize, usize, f64, Point2),
    end: usize,
    w: usize,
) -> EncounterEvent {
    let kind = EncounterType::of(a.kind, b.kind);
    let group_size = match (a.kind, b.kind) {
        (SubjectKind::Group, SubjectKind::Single) => Some(a.members.len()),
        (SubjectKind::Single, SubjectKind::Group) => Some(b.members.len()),
        _ => None,
    };
    EncounterEvent {
        bin_index: scene.bin_index,
        kind,
        a: a.clone(),
        b: b.clone(),
        start_ms: scene.frame_times_ms[start],
        end_ms: scene.frame_times_ms[end],
        t_min_ms: scene.frame_times_ms[fmin],
        min_distance_mm: dmin,
        location_mm: loc,
        delta_v_a: speed_change(scene, a, fmin, w),
        delta_v_b: speed_change(scene, b, fmin, w),
        delta_theta_a: heading_change(scene, a, fmin, w),
        delta_theta_b: heading_change(scene, b, fmin, w),
        group_size,
    }
}
