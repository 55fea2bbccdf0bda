use super::MetricsError;
use crate::geom::{cross, signed_area, Point2};
use crate::ingest::EnvironmentGeometry;
use crate::seeding::{stage, stage_rng};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

const MM2_PER_M2: f64 = 1e6;

/// Convex hull by Andrew's monotone chain, counter-clockwise, without
/// collinear vertices. Fewer than three distinct points are returned as is
/// (sorted, deduplicated).
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Area of the convex hull in m². Degenerate (collinear or < 3 point) sets give 0.
pub fn convex_hull_area(points: &[Point2]) -> f64 {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return 0.0;
    }
    signed_area(&hull).abs() / MM2_PER_M2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: Point2) -> bool {
        p.distance(self.center) <= self.radius * (1.0 + 1e-12) + 1e-9
    }

    fn diameter(a: Point2, b: Point2) -> Self {
        Circle { center: a.midpoint(b), radius: a.distance(b) / 2.0 }
    }

    fn through(a: Point2, b: Point2, c: Point2) -> Self {
        let (bx, by) = (b.x - a.x, b.y - a.y);
        let (cx, cy) = (c.x - a.x, c.y - a.y);
        let d = 2.0 * (bx * cy - by * cx);
        let scale = (bx * bx + by * by).max(cx * cx + cy * cy);
        if d.abs() <= 1e-12 * scale {
            // collinear: the widest pair spans the other point
            return [Self::diameter(a, b), Self::diameter(a, c), Self::diameter(b, c)]
                .into_iter()
                .max_by(|x, y| x.radius.total_cmp(&y.radius))
                .unwrap_or(Self::diameter(a, b));
        }
        let (b2, c2) = (bx * bx + by * by, cx * cx + cy * cy);
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        let center = Point2::new(a.x + ux, a.y + uy);
        let radius = [a, b, c].iter().map(|p| p.distance(center)).fold(0.0, f64::max);
        Circle { center, radius }
    }
}

/// Minimum-radius circle containing every point (Welzl's randomized
/// incremental algorithm; the insertion order is shuffled from `seed`).
///
/// `None` for an empty input.
pub fn smallest_enclosing_circle(points: &[Point2], seed: u64) -> Option<Circle> {
    let mut pts = points.to_vec();
    pts.shuffle(&mut stage_rng(seed, stage::ENCLOSING_CIRCLE));
    let mut c = Circle { center: *pts.first()?, radius: 0.0 };
    for i in 1..pts.len() {
        if c.contains(pts[i]) {
            continue;
        }
        c = Circle { center: pts[i], radius: 0.0 };
        for j in 0..i {
            if c.contains(pts[j]) {
                continue;
            }
            c = Circle::diameter(pts[i], pts[j]);
            for k in 0..j {
                if !c.contains(pts[k]) {
                    c = Circle::through(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    Some(c)
}

/// Point counts on a rectangular grid anchored at the boundary's bounding-box minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub cell_mm: f64,
    pub origin: Point2,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `counts[iy * nx + ix]`.
    pub counts: Vec<u64>,
}

impl HeatmapGrid {
    pub fn new(geometry: &EnvironmentGeometry, cell_mm: f64) -> Result<Self, MetricsError> {
        if !(cell_mm.is_finite() && cell_mm > 0.0) {
            return Err(MetricsError::InvalidCellSize(cell_mm));
        }
        let (lo, hi) = geometry.bounding_box();
        let nx = (((hi.x - lo.x) / cell_mm).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / cell_mm).ceil() as usize).max(1);
        Ok(Self { cell_mm, origin: lo, nx, ny, counts: vec![0; nx * ny] })
    }

    /// Grid cell of `p`, clamped onto the grid (points on the far edge land in the last cell).
    pub fn cell_of(&self, p: Point2) -> (usize, usize) {
        let idx = |v: f64, o: f64, n: usize| (((v - o) / self.cell_mm).floor().max(0.0) as usize).min(n - 1);
        (idx(p.x, self.origin.x, self.nx), idx(p.y, self.origin.y, self.ny))
    }

    pub fn count(&self, ix: usize, iy: usize) -> u64 {
        self.counts[iy * self.nx + ix]
    }

    /// `log10(count)`, absent for empty cells.
    pub fn log_density(&self, ix: usize, iy: usize) -> Option<f64> {
        let c = self.count(ix, iy);
        (c > 0).then(|| (c as f64).log10())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn add(&mut self, p: Point2) {
        let (ix, iy) = self.cell_of(p);
        self.counts[iy * self.nx + ix] += 1;
    }
}

/// Bins every in-boundary point; points outside the walkable area are ignored.
pub fn accumulate_heatmap<I>(points: I, geometry: &EnvironmentGeometry, cell_mm: f64) -> Result<HeatmapGrid, MetricsError>
where
    I: IntoIterator<Item = Point2>,
{
    let mut grid = HeatmapGrid::new(geometry, cell_mm)?;
    for p in points {
        if p.is_finite() && geometry.contains(p) {
            grid.add(p);
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Straightness {
    pub value: f64,
    /// Path length was zero; `value` is then 1 by convention.
    pub stationary: bool,
}

/// Endpoint displacement over path length, in `[0, 1]`. `None` for fewer than two points.
pub fn trajectory_straightness(path: &[Point2]) -> Option<Straightness> {
    let (first, last) = (path.first()?, path.last()?);
    if path.len() < 2 {
        return None;
    }
    // Neumaier summation keeps the path length close to the exact sum
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for w in path.windows(2) {
        let d = w[0].distance(w[1]);
        let t = sum + d;
        comp += if sum.abs() >= d { (sum - t) + d } else { (d - t) + sum };
        sum = t;
    }
    let length = sum + comp;
    if length == 0.0 {
        return Some(Straightness { value: 1.0, stationary: true });
    }
    // collinear and monotone steps are straight by definition; the ratio
    // alone can land an ulp short when step lengths are irrational
    let (dx, dy) = (last.x - first.x, last.y - first.y);
    let span = dx.hypot(dy);
    let straight = span > 0.0
        && path.windows(2).all(|w| {
            let (sx, sy) = (w[1].x - w[0].x, w[1].y - w[0].y);
            let step = sx.hypot(sy);
            (dx * sy - dy * sx).abs() <= 1e-9 * span * step && dx * sx + dy * sy >= 0.0
        });
    let value = if straight { 1.0 } else { (span / length).min(1.0) };
    Some(Straightness { value, stationary: false })
}
