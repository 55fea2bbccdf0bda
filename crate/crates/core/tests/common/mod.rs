//! Slow, obviously-correct reference implementations shared by the
//! property tests and the acceptance target.
#![allow(dead_code)]

use crowdflock::binning::{TimeBin, TrajectoryWindow};
use crowdflock::geom::Point2;
use crowdflock::ingest::TrajectoryPoint;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, VecDeque};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn random_points(r: &mut ChaCha8Rng, n: usize, span: f64) -> Vec<Point2> {
    (0..n).map(|_| Point2::new(r.random_range(-span..span), r.random_range(-span..span))).collect()
}

/// Circle through three points, or `None` if they are collinear.
fn circumcircle(a: Point2, b: Point2, c: Point2) -> Option<(Point2, f64)> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d.abs() < 1e-12 {
        return None;
    }
    let sq = |p: Point2| p.x * p.x + p.y * p.y;
    let ux = (sq(a) * (b.y - c.y) + sq(b) * (c.y - a.y) + sq(c) * (a.y - b.y)) / d;
    let uy = (sq(a) * (c.x - b.x) + sq(b) * (a.x - c.x) + sq(c) * (b.x - a.x)) / d;
    let center = Point2::new(ux, uy);
    Some((center, center.distance(a)))
}

/// Smallest circle among every circle spanned by 2 or 3 of the points that
/// contains them all.
pub fn sec_radius_oracle(points: &[Point2]) -> f64 {
    if points.len() <= 1 {
        return 0.0;
    }
    let covers = |c: Point2, r: f64| points.iter().all(|p| p.distance(c) <= r * (1.0 + 1e-10) + 1e-7);
    let mut best = f64::INFINITY;
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            let c = points[i].midpoint(points[j]);
            let r = points[i].distance(points[j]) / 2.0;
            if r < best && covers(c, r) {
                best = r;
            }
            for k in j + 1..n {
                if let Some((c, r)) = circumcircle(points[i], points[j], points[k]) {
                    if r < best && covers(c, r) {
                        best = r;
                    }
                }
            }
        }
    }
    best
}

/// Jarvis march, then the shoelace formula; m².
pub fn hull_area_oracle(points: &[Point2]) -> f64 {
    let pts: Vec<Point2> = {
        let mut v = points.to_vec();
        v.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        v.dedup();
        v
    };
    if pts.len() < 3 {
        return 0.0;
    }
    let cross = |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let start = 0; // leftmost
    let mut hull = vec![];
    let mut p = start;
    loop {
        hull.push(pts[p]);
        let mut q = (p + 1) % pts.len();
        for r in 0..pts.len() {
            let c = cross(pts[p], pts[q], pts[r]);
            // r is more clockwise, or collinear and farther
            if c < 0.0 || (c == 0.0 && pts[p].distance(pts[r]) > pts[p].distance(pts[q])) {
                q = r;
            }
        }
        p = q;
        if p == start || hull.len() > pts.len() {
            break;
        }
    }
    let mut twice = 0.0;
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        twice += a.x * b.y - b.x * a.y;
    }
    (twice / 2.0).abs() / 1e6
}

/// Full (n+1)x(m+1) table.
pub fn dtw_oracle(a: &[Point2], b: &[Point2]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut t = vec![vec![f64::INFINITY; m + 1]; n + 1];
    t[0][0] = 0.0;
    for i in 1..=n {
        for j in 1..=m {
            let prev = t[i - 1][j].min(t[i][j - 1]).min(t[i - 1][j - 1]);
            t[i][j] = a[i - 1].distance(b[j - 1]) + prev;
        }
    }
    t[n][m]
}

/// Connected components by breadth-first search, as sorted member lists.
pub fn bfs_components(n: usize, edges: &[(usize, usize)]) -> BTreeSet<Vec<usize>> {
    let mut adj = vec![vec![]; n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut out = BTreeSet::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    q.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.insert(comp);
    }
    out
}

/// Slope and intercept from the 2x2 normal equations.
pub fn ols_oracle(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx = xs.iter().map(|x| x * x).sum::<f64>();
    let sxy = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>();
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy * sxx - sx * sxy) / det;
    (slope, intercept)
}

pub fn point(t_ms: i64, x: f64, y: f64, speed: f64, heading: f64) -> TrajectoryPoint {
    TrajectoryPoint { t_ms, x_mm: x, y_mm: y, speed_mm_s: speed, motion_angle_rad: heading, facing_angle_rad: heading }
}

/// 3 Hz window from bare positions; speed and heading from finite differences.
pub fn window_from(pid: u64, t0_ms: i64, pos: &[Point2]) -> TrajectoryWindow {
    let dt = 1000.0 / 3.0;
    let samples = pos
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let q = if k + 1 < pos.len() { pos[k + 1] } else { p };
            let o = if k + 1 < pos.len() { p } else if k > 0 { pos[k - 1] } else { p };
            let (dx, dy) = if k + 1 < pos.len() { (q.x - o.x, q.y - o.y) } else { (p.x - o.x, p.y - o.y) };
            point(
                t0_ms + (k as f64 * dt).round() as i64,
                p.x,
                p.y,
                (dx * dx + dy * dy).sqrt() / (dt / 1000.0),
                dy.atan2(dx),
            )
        })
        .collect();
    TrajectoryWindow { pid, bin_index: 0, samples, rate_hz: 3.0 }
}

pub fn bin_of(windows: Vec<TrajectoryWindow>) -> TimeBin {
    let t_start_ms = windows.iter().map(|w| w.start_ms()).min().unwrap_or(0);
    TimeBin { bin_index: 0, t_start_ms, t_end_ms: t_start_ms + 60_000, windows }
}
