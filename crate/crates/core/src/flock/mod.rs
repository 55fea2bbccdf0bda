//! Flock detection: confident pair edges clustered per bin with union-find.

mod union_find;
mod validate;

pub use union_find::UnionFind;
pub use validate::{validate_assignment, ValidationReport};

use crate::classifier::{threshold_pairs, PairScore};
use crate::io_util::{csv_reader, schema_comment};
use crate::{Pid, PidPair};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlockError {
    #[error("bin {bin}: edge {pair} references pid {pid} which is not a member of the bin")]
    UnknownPid { bin: usize, pair: PidPair, pid: Pid },
}

/// Partition of one bin's eligible pedestrians into flocks and singles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlockAssignment {
    pub bin_index: usize,
    /// Each flock sorted ascending; flocks ordered by their smallest member.
    pub groups: Vec<Vec<Pid>>,
    /// Sorted ascending.
    pub singles: Vec<Pid>,
}

impl FlockAssignment {
    pub fn agent_count(&self) -> usize {
        self.singles.len() + self.groups.iter().map(Vec::len).sum::<usize>()
    }

    pub fn flock_agent_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Index of the flock holding `pid`.
    pub fn flock_of(&self, pid: Pid) -> Option<usize> {
        self.groups.iter().position(|g| g.binary_search(&pid).is_ok())
    }

    pub fn members(&self) -> Vec<Pid> {
        let mut all: Vec<Pid> = self.groups.iter().flatten().chain(&self.singles).copied().collect();
        all.sort_unstable();
        all
    }
}

/// Connected components of the edge graph over `members`: components of two or
/// more become flocks, the rest singles.
pub fn cluster_edges<I>(bin_index: usize, members: &[Pid], edges: I) -> Result<FlockAssignment, FlockError>
where
    I: IntoIterator<Item = PidPair>,
{
    let mut ids = members.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut uf = UnionFind::new(ids.len());
    let index = |pid: Pid, pair: PidPair| {
        ids.binary_search(&pid)
            .map_err(|_| FlockError::UnknownPid { bin: bin_index, pair, pid })
    };
    for e in edges {
        let a = index(e.first(), e)?;
        let b = index(e.second(), e)?;
        uf.union(a, b);
    }
    let mut groups = Vec::new();
    let mut singles = Vec::new();
    for comp in uf.components() {
        if comp.len() >= 2 {
            groups.push(comp.into_iter().map(|i| ids[i]).collect());
        } else {
            singles.push(ids[comp[0]]);
        }
    }
    Ok(FlockAssignment { bin_index, groups, singles })
}

/// Thresholds `scores` at `tau` and clusters each bin of `members_by_bin`.
///
/// Bins present only in `scores` get their members from the scored pairs.
pub fn detect_flocks(
    members_by_bin: &BTreeMap<usize, Vec<Pid>>,
    scores: &[PairScore],
    tau: f64,
) -> Result<Vec<FlockAssignment>, FlockError> {
    let mut members = members_by_bin.clone();
    for s in scores {
        if !members_by_bin.contains_key(&s.bin_index) {
            let m = members.entry(s.bin_index).or_default();
            m.push(s.pair.first());
            m.push(s.pair.second());
        }
    }
    let mut edges: BTreeMap<usize, Vec<PidPair>> = BTreeMap::new();
    for s in threshold_pairs(scores, tau) {
        edges.entry(s.bin_index).or_default().push(s.pair);
    }
    members
        .iter()
        .map(|(&bin, pids)| cluster_edges(bin, pids, edges.remove(&bin).unwrap_or_default()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlockSummaryReport {
    pub bins: usize,
    pub total_agents: usize,
    pub flock_agents: usize,
    pub flocks: usize,
    /// Absent when there are no agents.
    pub flock_percentage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detection_runtime_s: Option<f64>,
}

pub fn flock_summary(assignments: &[FlockAssignment]) -> FlockSummaryReport {
    let total: usize = assignments.iter().map(FlockAssignment::agent_count).sum();
    let in_flocks: usize = assignments.iter().map(FlockAssignment::flock_agent_count).sum();
    FlockSummaryReport {
        bins: assignments.len(),
        total_agents: total,
        flock_agents: in_flocks,
        flocks: assignments.iter().map(|a| a.groups.len()).sum(),
        flock_percentage: (total > 0).then(|| 100.0 * in_flocks as f64 / total as f64),
        detection_runtime_s: None,
    }
}

/// One row per agent: `bin_index,pid,label,flock_id` (flock id empty for singles).
pub fn write_assignments<W: Write>(mut w: W, assignments: &[FlockAssignment]) -> io::Result<()> {
    writeln!(w, "{}", schema_comment("assignments"))?;
    writeln!(w, "bin_index,pid,label,flock_id")?;
    for a in assignments {
        let mut rows: Vec<(Pid, Option<usize>)> = a
            .groups
            .iter()
            .enumerate()
            .flat_map(|(k, g)| g.iter().map(move |&p| (p, Some(k))))
            .chain(a.singles.iter().map(|&p| (p, None)))
            .collect();
        rows.sort_unstable();
        for (pid, flock) in rows {
            match flock {
                Some(k) => writeln!(w, "{},{},GROUP,{}", a.bin_index, pid, k)?,
                None => writeln!(w, "{},{},SINGLE,", a.bin_index, pid)?,
            }
        }
    }
    w.flush()
}

fn bad(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn read_assignments<R: Read>(r: R) -> io::Result<Vec<FlockAssignment>> {
    let mut bins: BTreeMap<usize, (BTreeMap<usize, Vec<Pid>>, Vec<Pid>)> = BTreeMap::new();
    for (i, rec) in csv_reader(r).records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.get(0) == Some("bin_index") {
            continue;
        }
        let row = i + 1;
        if rec.len() != 4 {
            return Err(bad(format!("assignments row {row}: expected 4 fields")));
        }
        let bin: usize = rec[0].parse().map_err(|_| bad(format!("assignments row {row}: bad bin")))?;
        let pid: Pid = rec[1].parse().map_err(|_| bad(format!("assignments row {row}: bad pid")))?;
        let entry = bins.entry(bin).or_default();
        match &rec[2] {
            "GROUP" => {
                let k: usize = rec[3].parse().map_err(|_| bad(format!("assignments row {row}: bad flock id")))?;
                entry.0.entry(k).or_default().push(pid);
            }
            "SINGLE" => entry.1.push(pid),
            other => return Err(bad(format!("assignments row {row}: unknown label {other:?}"))),
        }
    }
    Ok(bins
        .into_iter()
        .map(|(bin_index, (groups, mut singles))| {
            let mut groups: Vec<Vec<Pid>> = groups
                .into_values()
                .map(|mut g| {
                    g.sort_unstable();
                    g
                })
                .collect();
            groups.sort();
            singles.sort_unstable();
            FlockAssignment { bin_index, groups, singles }
        })
        .collect())
}
