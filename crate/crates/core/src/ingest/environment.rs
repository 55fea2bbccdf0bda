use super::{IngestError, Trajectory};
use crate::geom::{bounding_box, first_self_intersection, polygon_contains, signed_area, Point2};
use crate::Pid;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Read;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pillar {
    pub center: Point2,
    pub radius_mm: f64,
}

/// A labeled point of interest drawn as a line segment (shop front, exit, stairs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spot {
    pub label: String,
    pub a: Point2,
    pub b: Point2,
}

/// Walkable area of the scene. Construct through [`EnvironmentGeometry::new`]
/// or [`parse_environment`] so the boundary is known to be simple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentGeometry {
    boundary: Vec<Point2>,
    pillars: Vec<Pillar>,
    spots: Vec<Spot>,
}

impl EnvironmentGeometry {
    pub fn new(
        mut boundary: Vec<Point2>,
        pillars: Vec<Pillar>,
        spots: Vec<Spot>,
    ) -> Result<Self, IngestError> {
        if boundary.len() > 1 && boundary.first() == boundary.last() {
            boundary.pop();
        }
        if boundary.iter().any(|p| !p.is_finite()) {
            return Err(IngestError::NonFinite("boundary"));
        }
        if boundary.len() < 3 {
            return Err(IngestError::TooFewVertices(boundary.len()));
        }
        if let Some((i, j)) = first_self_intersection(&boundary) {
            return Err(IngestError::SelfIntersecting(i, j));
        }
        if signed_area(&boundary) == 0.0 {
            return Err(IngestError::DegenerateBoundary);
        }
        for (index, p) in pillars.iter().enumerate() {
            if !(p.radius_mm.is_finite() && p.radius_mm > 0.0) {
                return Err(IngestError::InvalidPillar { index, radius: p.radius_mm });
            }
            if !p.center.is_finite() {
                return Err(IngestError::NonFinite("pillar center"));
            }
        }
        if spots.iter().any(|s| !s.a.is_finite() || !s.b.is_finite()) {
            return Err(IngestError::NonFinite("spot"));
        }
        Ok(Self { boundary, pillars, spots })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, IngestError> {
        Self::new(
            vec![
                Point2::new(x0, y0),
                Point2::new(x1, y0),
                Point2::new(x1, y1),
                Point2::new(x0, y1),
            ],
            Vec::new(),
            Vec::new(),
        )
    }

    pub fn boundary(&self) -> &[Point2] {
        &self.boundary
    }

    pub fn pillars(&self) -> &[Pillar] {
        &self.pillars
    }

    pub fn spots(&self) -> &[Spot] {
        &self.spots
    }

    /// Inside or on the boundary polygon.
    pub fn contains(&self, p: Point2) -> bool {
        polygon_contains(&self.boundary, p)
    }

    pub fn area_m2(&self) -> f64 {
        signed_area(&self.boundary).abs() * 1e-6
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        bounding_box(&self.boundary).expect("boundary has at least 3 vertices")
    }

    pub fn centroid(&self) -> Point2 {
        let a = signed_area(&self.boundary);
        let n = self.boundary.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let p = self.boundary[i];
            let q = self.boundary[(i + 1) % n];
            let f = p.x * q.y - q.x * p.y;
            cx += (p.x + q.x) * f;
            cy += (p.y + q.y) * f;
        }
        Point2::new(cx / (6.0 * a), cy / (6.0 * a))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPillar {
    center: [f64; 2],
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpot {
    label: String,
    a: [f64; 2],
    b: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<String>,
    boundary: Vec<[f64; 2]>,
    #[serde(default)]
    pillars: Vec<RawPillar>,
    #[serde(default)]
    spots: Vec<RawSpot>,
}

fn pt(p: [f64; 2]) -> Point2 {
    Point2::new(p[0], p[1])
}

/// Reads the JSON geometry file (see `docs/geometry.md`).
pub fn parse_environment<R: Read>(reader: R) -> Result<EnvironmentGeometry, IngestError> {
    let raw: RawGeometry = serde_json::from_reader(reader)?;
    EnvironmentGeometry::new(
        raw.boundary.into_iter().map(pt).collect(),
        raw.pillars
            .into_iter()
            .map(|p| Pillar { center: pt(p.center), radius_mm: p.radius })
            .collect(),
        raw.spots
            .into_iter()
            .map(|s| Spot { label: s.label, a: pt(s.a), b: pt(s.b) })
            .collect(),
    )
}

impl EnvironmentGeometry {
    /// Serializes back to the geometry file layout.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": format!("crowdflock.environment.{}", crate::SCHEMA_VERSION),
            "boundary": self.boundary.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
            "pillars": self.pillars.iter().map(|p| serde_json::json!({
                "center": [p.center.x, p.center.y], "radius": p.radius_mm
            })).collect::<Vec<_>>(),
            "spots": self.spots.iter().map(|s| serde_json::json!({
                "label": s.label, "a": [s.a.x, s.a.y], "b": [s.b.x, s.b.y]
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Default)]
pub struct FilterReport {
    pub trajectories: BTreeMap<Pid, Trajectory>,
    pub points_removed: usize,
    pub trajectories_dropped: usize,
}

/// Drops every point outside the boundary, then every trajectory left empty.
pub fn filter_to_boundary(
    trajectories: BTreeMap<Pid, Trajectory>,
    geometry: &EnvironmentGeometry,
) -> FilterReport {
    let mut report = FilterReport::default();
    for (pid, mut tr) in trajectories {
        let before = tr.points.len();
        tr.points.retain(|p| geometry.contains(p.position()));
        report.points_removed += before - tr.points.len();
        if tr.points.is_empty() {
            report.trajectories_dropped += 1;
        } else {
            report.trajectories.insert(pid, tr);
        }
    }
    report
}
