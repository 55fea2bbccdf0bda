mod common;

use common::*;
use crowdflock::binning::{resample_uniform, TrajectoryWindow};
use crowdflock::classifier::{loss_and_gradient, mean_loss, LogisticParams, PairScore};
use crowdflock::flock::{cluster_edges, detect_flocks, UnionFind};
use crowdflock::geom::Point2;
use crowdflock::ingest::{EnvironmentGeometry, Trajectory};
use crowdflock::metrics::{
    accumulate_heatmap, convex_hull_area, ecdf, heading_change, interaction_timeline, ols, smallest_enclosing_circle,
    trajectory_straightness, BinScene, EncounterEvent, EncounterType, Subject,
};
use crowdflock::pairfeat::{dtw_distance, extract_pair_features, mean_inter_distance, DtwConvention, FeatureConfig};
use crowdflock::PidPair;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

fn pt() -> impl Strategy<Value = Point2> {
    (-5000.0..5000.0f64, -5000.0..5000.0f64).prop_map(|(x, y)| Point2::new(x, y))
}

fn positions(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec(pt(), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sec_matches_support_enumeration(points in positions(1..10), seed in any::<u64>()) {
        let c = smallest_enclosing_circle(&points, seed).unwrap();
        prop_assert!(rel_close(c.radius, sec_radius_oracle(&points), 1e-9));
        for p in &points {
            prop_assert!(p.distance(c.center) <= c.radius * (1.0 + 1e-9) + 1e-6);
        }
    }

    #[test]
    fn sec_radius_ignores_seed(points in positions(2..20), s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = smallest_enclosing_circle(&points, s1).unwrap().radius;
        let b = smallest_enclosing_circle(&points, s2).unwrap().radius;
        prop_assert!(rel_close(a, b, 1e-9));
    }

    #[test]
    fn hull_area_matches_gift_wrapping(points in positions(0..40)) {
        prop_assert!(rel_close(convex_hull_area(&points), hull_area_oracle(&points), 1e-9));
    }

    #[test]
    fn hull_area_under_rigid_motion_and_scale(points in positions(3..30), theta in -PI..PI,
                                              dx in -1e4..1e4f64, dy in -1e4..1e4f64, s in 0.1..10.0f64) {
        let (c, sn) = (theta.cos(), theta.sin());
        let moved: Vec<Point2> = points.iter().map(|p| Point2::new(c * p.x - sn * p.y + dx, sn * p.x + c * p.y + dy)).collect();
        let scaled: Vec<Point2> = points.iter().map(|p| Point2::new(p.x * s, p.y * s)).collect();
        let a = convex_hull_area(&points);
        prop_assert!(rel_close(convex_hull_area(&moved), a, 1e-9));
        prop_assert!(rel_close(convex_hull_area(&scaled), a * s * s, 1e-9));
    }

    #[test]
    fn hull_area_bounded_by_sec_disc(points in positions(1..30)) {
        let r = smallest_enclosing_circle(&points, 0).unwrap().radius;
        prop_assert!(convex_hull_area(&points) <= PI * r * r / 1e6 * (1.0 + 1e-9));
    }

    #[test]
    fn dtw_matches_full_table(a in positions(1..11), b in positions(1..11)) {
        let (wa, wb) = (window_from(1, 0, &a), window_from(2, 0, &b));
        let d = dtw_distance(&wa, &wb, DtwConvention::Accumulated).unwrap();
        prop_assert!(rel_close(d, dtw_oracle(&a, &b), 1e-9));
        let swapped = dtw_distance(&wb, &wa, DtwConvention::Accumulated).unwrap();
        prop_assert!(rel_close(d, swapped, 1e-12));
        let per = dtw_distance(&wa, &wb, DtwConvention::CombinedLength).unwrap();
        prop_assert!(rel_close(per * (a.len() + b.len()) as f64, d, 1e-12));
    }

    #[test]
    fn dtw_triangle_with_lockstep(a in positions(2..10)) {
        // the diagonal path is one admissible warping, so DTW never exceeds it
        let b: Vec<Point2> = a.iter().map(|p| Point2::new(p.x + 37.0, p.y - 11.0)).collect();
        let lockstep: f64 = a.iter().zip(&b).map(|(p, q)| p.distance(*q)).sum();
        prop_assert!(dtw_oracle(&a, &b) <= lockstep + 1e-9);
        let (wa, wb) = (window_from(1, 0, &a), window_from(2, 0, &b));
        prop_assert!(dtw_distance(&wa, &wb, DtwConvention::Accumulated).unwrap() <= lockstep + 1e-9);
    }

    #[test]
    fn features_symmetric_and_mean_distance_oracle(a in positions(2..12), b in positions(2..12), lag in 0i64..5000) {
        let n = a.len().min(b.len());
        let (wa, wb) = (window_from(1, 0, &a[..n]), window_from(2, lag, &b[..n]));
        let f = FeatureConfig::default();
        prop_assert_eq!(extract_pair_features(&wa, &wb, &f).unwrap(), extract_pair_features(&wb, &wa, &f).unwrap());
        let naive = a[..n].iter().zip(&b[..n]).map(|(p, q)| p.distance(*q)).sum::<f64>() / n as f64;
        prop_assert!(rel_close(mean_inter_distance(&wa, &wb).unwrap(), naive, 1e-9));
        let g = extract_pair_features(&wa, &wb, &f).unwrap();
        prop_assert!(g.to_array().iter().all(|v| *v >= 0.0));
        prop_assert!(g.motion_angle_diff_rad <= PI + 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences(w in prop::array::uniform6(-2.0..2.0f64), bias in -2.0..2.0f64, seed in any::<u64>()) {
        let mut r = rng(seed);
        let xs: Vec<[f64; 6]> = (0..25).map(|_| std::array::from_fn(|_| r.random_range(-3.0..3.0))).collect();
        let ys: Vec<f64> = (0..25).map(|_| if r.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let p = LogisticParams { weights: w, bias };
        let (_, g) = loss_and_gradient(&p, &xs, &ys);
        let h = 1e-5;
        for k in 0..7 {
            let bump = |d: f64| {
                let mut q = p;
                if k < 6 { q.weights[k] += d } else { q.bias += d }
                mean_loss(&q, &xs, &ys)
            };
            let fd = (bump(h) - bump(-h)) / (2.0 * h);
            let an = if k < 6 { g.weights[k] } else { g.bias };
            prop_assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-2), "k={} fd={} an={}", k, fd, an);
        }
    }

    #[test]
    fn union_find_equals_bfs_and_ignores_edge_order(n in 1usize..20, raw in prop::collection::vec((0usize..20, 0usize..20), 0..40), seed in any::<u64>()) {
        let mut edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b).collect();
        let oracle = bfs_components(n, &edges);
        let components = |edges: &[(usize, usize)]| {
            let mut uf = UnionFind::new(n);
            for &(a, b) in edges {
                uf.union(a, b);
            }
            uf.components().into_iter().collect::<BTreeSet<Vec<usize>>>()
        };
        prop_assert_eq!(components(&edges), oracle.clone());
        edges.shuffle(&mut rng(seed));
        let flipped: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (b, a)).collect();
        prop_assert_eq!(components(&flipped), oracle.clone());

        let pids: Vec<u64> = (0..n as u64).map(|i| i + 100).collect();
        let pairs = edges.iter().map(|&(a, b)| PidPair::new(a as u64 + 100, b as u64 + 100).unwrap());
        let asg = cluster_edges(0, &pids, pairs).unwrap();
        let mut got: BTreeSet<Vec<usize>> = asg.groups.iter().map(|g| g.iter().map(|p| (*p - 100) as usize).collect()).collect();
        got.extend(asg.singles.iter().map(|p| vec![(*p - 100) as usize]));
        prop_assert_eq!(got, oracle);
    }

    #[test]
    fn raising_threshold_only_splits(probs in prop::collection::vec(0.0..1.0f64, 45), t1 in 0.0..1.0f64, t2 in 0.0..1.0f64) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let mut scores = Vec::new();
        let mut k = 0;
        for a in 1..=10u64 {
            for b in a + 1..=10 {
                scores.push(PairScore { bin_index: 0, pair: PidPair::new(a, b).unwrap(), probability: probs[k] });
                k += 1;
            }
        }
        let universe = BTreeMap::from([(0, (1..=10).collect::<Vec<u64>>())]);
        let coarse = &detect_flocks(&universe, &scores, lo).unwrap()[0];
        let fine = &detect_flocks(&universe, &scores, hi).unwrap()[0];
        for g in &fine.groups {
            let id = coarse.flock_of(g[0]);
            prop_assert!(id.is_some());
            prop_assert!(g.iter().all(|p| coarse.flock_of(*p) == id));
        }
        prop_assert!(fine.flock_agent_count() <= coarse.flock_agent_count());
    }

    #[test]
    fn ols_matches_normal_equations(pts in prop::collection::vec((-100.0..100.0f64, -1e4..1e4f64), 3..40)) {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        prop_assume!(xs.iter().any(|x| (x - xs[0]).abs() > 1e-3));
        let (slope, intercept) = ols_oracle(&xs, &ys);
        let r = ols(&xs, &ys);
        prop_assert!(rel_close(r.slope.unwrap(), slope, 1e-9));
        prop_assert!(rel_close(r.intercept.unwrap(), intercept, 1e-9));
        if let Some(rr) = r.r {
            prop_assert!(rr.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn ecdf_is_count_fraction(values in prop::collection::vec(0u8..20, 1..60)) {
        let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        let steps = ecdf(&v);
        let n = v.len() as f64;
        for (x, frac) in &steps {
            let count = v.iter().filter(|y| **y <= *x).count() as f64;
            prop_assert_eq!(*frac, count / n);
        }
        prop_assert!(steps.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        prop_assert_eq!(steps.last().unwrap().1, 1.0);
    }

    #[test]
    fn heatmap_conserves_in_boundary_mass(points in prop::collection::vec((-2000.0..12000.0f64, -2000.0..7000.0f64), 0..300), cell in 100.0..3000.0f64) {
        let geom = EnvironmentGeometry::rectangle(0.0, 0.0, 10_000.0, 5000.0).unwrap();
        let pts: Vec<Point2> = points.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let inside = pts.iter().filter(|p| geom.contains(**p)).count() as u64;
        let grid = accumulate_heatmap(pts.iter().copied(), &geom, cell).unwrap();
        prop_assert_eq!(grid.total(), inside);
        prop_assert_eq!(grid.counts.iter().sum::<u64>(), inside);
    }

    #[test]
    fn straightness_in_unit_interval(path in positions(2..30)) {
        let s = trajectory_straightness(&path).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.value));
    }

    #[test]
    fn resampled_points_lie_on_the_polyline(steps in prop::collection::vec((80i64..120, -200.0..200.0f64, -200.0..200.0f64), 3..40)) {
        let mut t = 0;
        let (mut x, mut y) = (0.0, 0.0);
        let mut points = vec![point(0, 0.0, 0.0, 1000.0, 0.0)];
        for (dt, dx, dy) in steps {
            t += dt;
            x += dx;
            y += dy;
            points.push(point(t, x, y, 1000.0, 0.0));
        }
        let traj = Trajectory { pid: 1, points: points.clone() };
        let Some(res) = resample_uniform(&traj, 3.0) else { return Ok(()) };
        for s in &res.points {
            // oracle: locate the bracketing raw samples by scan and interpolate
            let i = points.iter().rposition(|p| p.t_ms <= s.t_ms).unwrap();
            let (a, b) = (points[i], points[(i + 1).min(points.len() - 1)]);
            let f = if b.t_ms == a.t_ms { 0.0 } else { (s.t_ms - a.t_ms) as f64 / (b.t_ms - a.t_ms) as f64 };
            prop_assert!((s.x_mm - (a.x_mm + f * (b.x_mm - a.x_mm))).abs() < 1e-6);
            prop_assert!((s.y_mm - (a.y_mm + f * (b.y_mm - a.y_mm))).abs() < 1e-6);
        }
    }

    #[test]
    fn clearance_matches_pairwise_scan(tracks in prop::collection::vec(positions(5..6), 2..7)) {
        let windows: Vec<TrajectoryWindow> = tracks.iter().enumerate().map(|(i, p)| window_from(i as u64 + 1, 0, p)).collect();
        let scene = BinScene::from_bin(&bin_of(windows));
        for f in 0..5 {
            for (i, me) in tracks.iter().enumerate() {
                let naive = tracks.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| o[f].distance(me[f])).fold(f64::INFINITY, f64::min);
                let got = scene.clearance_radius(i as u64 + 1, f).unwrap();
                prop_assert!(rel_close(got, naive, 1e-9));
            }
        }
    }

    #[test]
    fn heading_change_rotation_invariant(turn in -3.0..3.0f64, phi in -PI..PI) {
        // walk east 20 steps, then turn by `turn` and walk 20 more
        let mut pos = vec![Point2::new(0.0, 0.0)];
        for k in 1..41 {
            let h = if k <= 20 { 0.0 } else { turn };
            let p = *pos.last().unwrap();
            pos.push(Point2::new(p.x + 400.0 * h.cos(), p.y + 400.0 * h.sin()));
        }
        let rot = |p: &Point2| Point2::new(phi.cos() * p.x - phi.sin() * p.y, phi.sin() * p.x + phi.cos() * p.y);
        let rotated: Vec<Point2> = pos.iter().map(rot).collect();
        let dtheta = |pts: &[Point2]| {
            let scene = BinScene::from_bin(&bin_of(vec![window_from(1, 0, pts)]));
            heading_change(&scene, &Subject::single(1), 20, 10).unwrap()
        };
        let (a, b) = (dtheta(&pos), dtheta(&rotated));
        prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
    }
}

fn event(kind: EncounterType, t_min_ms: i64) -> EncounterEvent {
    EncounterEvent {
        bin_index: 0,
        kind,
        a: Subject::single(1),
        b: Subject::single(2),
        start_ms: t_min_ms,
        end_ms: t_min_ms,
        t_min_ms,
        min_distance_mm: 500.0,
        location_mm: Point2::new(0.0, 0.0),
        delta_v_a: None,
        delta_v_b: None,
        delta_theta_a: None,
        delta_theta_b: None,
        group_size: None,
    }
}

#[test]
fn timeline_totals_equal_group_by() {
    let mut r = rng(3);
    let events: Vec<EncounterEvent> = (0..500)
        .map(|_| event(EncounterType::ALL[r.random_range(0..3)], r.random_range(0..600_000)))
        .collect();
    let rows = interaction_timeline(&events, 0, Some(600_000));
    assert_eq!(rows.len(), 10 * 3);
    let mut oracle: BTreeMap<(i64, EncounterType), u64> = BTreeMap::new();
    for e in &events {
        *oracle.entry((e.t_min_ms / 60_000, e.kind)).or_default() += 1;
    }
    for row in rows {
        assert_eq!(row.count, oracle.get(&(row.minute, row.kind)).copied().unwrap_or(0));
    }
}
