//! Group/single pedestrian classification from tracking data.
//!
//! The crate turns raw pedestrian tracking records into per-bin flock
//! assignments and then measures how groups and singles use space and
//! interact:
//!
//! 1. [`ingest`] parses tracking CSVs, group annotations and the environment
//!    geometry, and drops points outside the walkable boundary.
//! 2. [`binning`] resamples every trajectory to a uniform rate, assigns it to a
//!    fixed-width time bin by start time and keeps the first `L` samples of
//!    long-enough trajectories.
//! 3. [`pairfeat`] computes six pairwise descriptors for every pair of windows
//!    that share a bin.
//! 4. [`classifier`] trains and applies a pair scorer (a standardized logistic
//!    model, or scores imported from an external model).
//! 5. [`flock`] keeps confident pairs and clusters them with union-find.
//! 6. [`metrics`] computes footprints, heatmaps, encounters and their
//!    summaries.
//!
//! [`pipeline`] chains all of it with one seed and writes every intermediate
//! artifact. Each stage is also usable on its own; see the `examples/`
//! directory of this crate.

pub mod binning;
pub mod classifier;
pub mod flock;
pub mod geom;
pub mod ingest;
pub mod metrics;
pub mod pairfeat;
pub mod pipeline;
pub mod seeding;

mod io_util;

use serde::{Deserialize, Serialize};
use std::fmt;

/// Pedestrian identifier as it appears in the tracking data.
pub type Pid = u64;

/// Unordered pair of pedestrians, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PidPair {
    a: Pid,
    b: Pid,
}

impl PidPair {
    /// Canonicalizes the order. Returns `None` for a self-pair.
    pub fn new(x: Pid, y: Pid) -> Option<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(Self { a: x, b: y }),
            std::cmp::Ordering::Greater => Some(Self { a: y, b: x }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(&self) -> Pid {
        self.a
    }

    pub fn second(&self) -> Pid {
        self.b
    }

    pub fn contains(&self, pid: Pid) -> bool {
        self.a == pid || self.b == pid
    }
}

impl fmt::Display for PidPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

/// Version string stamped into every output file.
pub const SCHEMA_VERSION: &str = "v1";
