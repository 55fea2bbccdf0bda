//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness; exits non-zero if any criterion fails.
//!
//! The real-data structural checks run only when `CROWDFLOCK_ATC_TRACKING`
//! points at the ATC day file; otherwise they print SKIP.

mod common;

use common::*;
use crowdflock::binning::{prepare_bins, BinningConfig};
use crowdflock::classifier::{loss_and_gradient, mean_loss, train_logistic, LabeledPair, LogisticParams, TrainConfig};
use crowdflock::flock::{cluster_edges, read_assignments};
use crowdflock::geom::Point2;
use crowdflock::ingest::{annotation_pair_set, parse_group_annotations, parse_tracking_csv, summarize_dataset, EnvironmentGeometry};
use crowdflock::metrics::{
    accumulate_heatmap, convex_hull_area, detect_encounters, heading_change, smallest_enclosing_circle,
    trajectory_straightness, BinScene, EncounterConfig, Subject,
};
use crowdflock::pairfeat::{dtw_distance, DtwConvention, FeatureMeta, PairFeatures};
use crowdflock::pipeline::{
    bin_stage, generate_synthetic_scenario, ingest_stage, run_pipeline, write_synthetic, Direction, PipelineConfig,
    PlantedParams, ScenarioSpec, WalkerSpec,
};
use crowdflock::PidPair;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn geometry_oracles() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst_sec = 0.0f64;
    for i in 0..200 {
        let n = r.random_range(1..=12);
        let pts = random_points(&mut r, n, 10_000.0);
        let got = smallest_enclosing_circle(&pts, i).unwrap().radius;
        let want = sec_radius_oracle(&pts);
        worst_sec = worst_sec.max((got - want).abs() / want.max(1.0));
    }
    let mut worst_hull = 0.0f64;
    for _ in 0..200 {
        let n = r.random_range(0..=50);
        let pts = random_points(&mut r, n, 10_000.0);
        let (got, want) = (convex_hull_area(&pts), hull_area_oracle(&pts));
        worst_hull = worst_hull.max((got - want).abs() / want.max(1e-12));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_sec <= 1e-9 && worst_hull <= 1e-9 && secs < 5.0,
        format!("max rel err SEC {worst_sec:.1e}, hull {worst_hull:.1e}; {secs:.2}s"),
    )
}

fn dtw_oracle_check() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (n, m) = (r.random_range(1..=10), r.random_range(1..=10));
        let (a, b) = (random_points(&mut r, n, 5000.0), random_points(&mut r, m, 5000.0));
        let got = dtw_distance(&window_from(1, 0, &a), &window_from(2, 0, &b), DtwConvention::Accumulated).unwrap();
        let want = dtw_oracle(&a, &b);
        worst = worst.max((got - want).abs() / want.max(1.0));
    }
    outcome(worst <= 1e-9, format!("100 pairs, max rel err {worst:.1e}"))
}

fn classifier_checks() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let xs: Vec<[f64; 6]> = (0..40).map(|_| std::array::from_fn(|_| r.random_range(-3.0..3.0))).collect();
        let ys: Vec<f64> = (0..40).map(|_| if r.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let p = LogisticParams { weights: std::array::from_fn(|_| r.random_range(-2.0..2.0)), bias: r.random_range(-2.0..2.0) };
        let (_, g) = loss_and_gradient(&p, &xs, &ys);
        let h = 1e-5;
        for k in 0..7 {
            let at = |d: f64| {
                let mut q = p;
                if k < 6 { q.weights[k] += d } else { q.bias += d }
                mean_loss(&q, &xs, &ys)
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            let an = if k < 6 { g.weights[k] } else { g.bias };
            worst = worst.max((fd - an).abs() / an.abs().max(1e-3));
        }
    }
    // positives at -1, negatives at +1 on the first feature
    let toy: Vec<LabeledPair> = (0..200)
        .map(|i| {
            let label = i < 100;
            let mut f = [0.0; 6];
            f[0] = if label { -1.0 } else { 1.0 };
            LabeledPair { bin_index: 0, pair: PidPair::new(i + 1, i + 1000).unwrap(), features: PairFeatures::from_array(f), label }
        })
        .collect();
    let cfg = TrainConfig { learning_rate: 0.001, max_epochs: 1000, ..TrainConfig::default() };
    let meta = FeatureMeta { rate_hz: 3.0, seq_len: 60, dtw: DtwConvention::Accumulated };
    let (_, report) = train_logistic(&toy, &cfg, meta).unwrap();
    outcome(
        worst <= 1e-6 && report.train_accuracy == 1.0,
        format!(
            "gradient max rel err {worst:.1e} at 50 points; toy accuracy {} after {} epochs at lr 0.001",
            report.train_accuracy, report.epochs_run
        ),
    )
}

/// Pair F1 and the number of planted pairs split across flocks in some bin
/// where both members are present.
fn planted_run(dir: &Path, seed: u64) -> (f64, usize) {
    let cfg = {
        let s = write_synthetic(dir, &PlantedParams::default(), seed).unwrap();
        PipelineConfig::load(&s.config).unwrap()
    };
    let m = run_pipeline(&cfg).unwrap();
    let f1 = m.stage("detect").and_then(|s| s.counts.get("pair_f1")).and_then(|v| v.as_f64()).unwrap_or(0.0);
    let truth = annotation_pair_set(
        &parse_group_annotations(File::open(dir.join("groups.txt")).unwrap()).unwrap().annotations,
    );
    let assignments = read_assignments(File::open(cfg.out_dir.join("assignments.csv")).unwrap()).unwrap();
    let split = truth
        .iter()
        .filter(|p| {
            assignments.iter().any(|a| {
                let (x, y) = (a.members(), p);
                x.contains(&y.first()) && x.contains(&y.second()) && (a.flock_of(y.first()).is_none() || a.flock_of(y.first()) != a.flock_of(y.second()))
            })
        })
        .count();
    (f1, split)
}

fn planted_recovery(tmp: &Path) -> Outcome {
    let (f1, split) = planted_run(&tmp.join("planted-7"), 7);
    outcome(f1 >= 0.95 && split == 0, format!("seed 7: pair F1 {f1:.3}, {split} planted pairs split"))
}

fn planted_sweep(tmp: &Path) -> String {
    let runs: Vec<(u64, f64, usize)> = (1..=12)
        .map(|s| {
            let (f1, split) = planted_run(&tmp.join(format!("sweep-{s}")), s);
            (s, f1, split)
        })
        .collect();
    let ok = runs.iter().filter(|(_, f1, split)| *f1 >= 0.95 && *split == 0).count();
    let misses: Vec<String> = runs.iter().filter(|(_, f1, _)| *f1 < 0.95).map(|(s, f1, _)| format!("{s}:{f1:.2}")).collect();
    format!("seeds 1..=12: {ok}/12 meet F1 >= 0.95 with no split (misses {})", misses.join(" "))
}

fn atc_structure() -> Option<Outcome> {
    let path = std::env::var_os("CROWDFLOCK_ATC_TRACKING")?;
    let parsed = parse_tracking_csv(BufReader::new(File::open(&path).ok()?)).ok()?;
    let s = summarize_dataset(parsed.trajectories.values()).ok()?;
    let mut totals = Vec::new();
    let mut n_bins = 0;
    for l in [60, 100, 200] {
        let cfg = BinningConfig { seq_len: l, ..BinningConfig::default() };
        let p = prepare_bins(parsed.trajectories.values(), &cfg);
        n_bins = p.bins.len();
        totals.push(p.bins.iter().map(|b| b.windows.len()).sum::<usize>());
    }
    let near = |got: usize, want: f64| (got as f64 - want).abs() <= 0.005 * want;
    let pass = s.total_records == 1_873_638
        && s.agents == 1620
        && n_bins == 63
        && near(totals[0], 1534.0)
        && near(totals[1], 1491.0)
        && near(totals[2], 1400.0);
    Some(outcome(
        pass,
        format!("{} records, {} agents, {} bins, L-filter totals {:?}", s.total_records, s.agents, n_bins, totals),
    ))
}

fn union_find_equivalence() -> Outcome {
    let mut r = rng(5);
    let (mut mismatches, mut perm_failures) = (0, 0);
    let comps = |n: usize, edges: &[(usize, usize)]| {
        let pids: Vec<u64> = (0..n as u64).collect();
        let a = cluster_edges(0, &pids, edges.iter().map(|&(x, y)| PidPair::new(x as u64, y as u64).unwrap())).unwrap();
        let mut got: BTreeSet<Vec<usize>> = a.groups.iter().map(|g| g.iter().map(|&p| p as usize).collect()).collect();
        got.extend(a.singles.iter().map(|&p| vec![p as usize]));
        got
    };
    for i in 0..500 {
        let n = r.random_range(1..=20);
        let m = r.random_range(0..=2 * n);
        let edges: Vec<(usize, usize)> = (0..m)
            .map(|_| (r.random_range(0..n), r.random_range(0..n)))
            .filter(|(a, b)| a != b)
            .collect();
        let oracle = bfs_components(n, &edges);
        if comps(n, &edges) != oracle {
            mismatches += 1;
        }
        if i < 50 {
            let mut shuffled = edges.clone();
            shuffled.shuffle(&mut r);
            if comps(n, &shuffled) != oracle {
                perm_failures += 1;
            }
        }
    }
    outcome(
        mismatches == 0 && perm_failures == 0,
        format!("500 graphs: {mismatches} BFS mismatches; 50 permutations: {perm_failures} differ"),
    )
}

fn metric_properties() -> Outcome {
    let straight: Vec<Point2> = (0..30).map(|k| Point2::new(123.0 + 417.0 * k as f64, -50.0 + 211.0 * k as f64)).collect();
    let s_straight = trajectory_straightness(&straight).unwrap().value;
    let mut lp: Vec<Point2> = (0..24).map(|k| {
        let a = k as f64 / 24.0 * std::f64::consts::TAU;
        Point2::new(1000.0 * a.cos(), 1000.0 * a.sin())
    }).collect();
    lp.push(lp[0]);
    let s_loop = trajectory_straightness(&lp).unwrap().value;

    // turn of 1.1 rad at frame 20, seen from 8 rotated frames
    let mut pos = vec![Point2::new(0.0, 0.0)];
    for k in 1..41 {
        let h = if k <= 20 { 0.3 } else { 1.4 };
        let p = *pos.last().unwrap();
        pos.push(Point2::new(p.x + 400.0 * f64::cos(h), p.y + 400.0 * f64::sin(h)));
    }
    let dtheta = |pts: &[Point2]| {
        let scene = BinScene::from_bin(&bin_of(vec![window_from(1, 0, pts)]));
        heading_change(&scene, &Subject::single(1), 20, 10).unwrap()
    };
    let base = dtheta(&pos);
    let mut rot_err = 0.0f64;
    for i in 0..8 {
        let phi = -3.0 + 0.8 * i as f64;
        let rotated: Vec<Point2> = pos.iter().map(|p| Point2::new(phi.cos() * p.x - phi.sin() * p.y, phi.sin() * p.x + phi.cos() * p.y)).collect();
        rot_err = rot_err.max((dtheta(&rotated) - base).abs());
    }

    let geom = EnvironmentGeometry::rectangle(0.0, 0.0, 20_000.0, 8000.0).unwrap();
    let mut r = rng(6);
    let pts = random_points(&mut r, 5000, 25_000.0);
    let inside = pts.iter().filter(|p| geom.contains(**p)).count() as u64;
    let grid = accumulate_heatmap(pts.iter().copied(), &geom, 700.0).unwrap();
    let mass_ok = grid.total() == inside && grid.counts.iter().sum::<u64>() == inside;

    // opens at <= 1500, closes above 1750: three episodes (a bare 1500 cut would see five)
    let profile = [3000.0, 1000.0, 1600.0, 1100.0, 2000.0, 1200.0, 3000.0, 1400.0, 1700.0, 1450.0, 4000.0];
    let mut a = vec![];
    let mut b = vec![];
    for &d in &profile {
        for _ in 0..3 {
            a.push(Point2::new(0.0, 0.0));
            b.push(Point2::new(d, 0.0));
        }
    }
    let scene = BinScene::from_bin(&bin_of(vec![window_from(1, 0, &a), window_from(2, 0, &b)]));
    let events = detect_encounters(&scene, &[Subject::single(1), Subject::single(2)], &EncounterConfig::default()).unwrap();
    let scripted = 3;

    let pass = s_straight == 1.0 && s_loop == 0.0 && rot_err <= 1e-9 && mass_ok && events.len() == scripted;
    outcome(
        pass,
        format!(
            "straight {s_straight}, loop {s_loop}, rotation err {rot_err:.1e}, heatmap {}/{inside}, hysteresis {}/{scripted} events",
            grid.total(),
            events.len()
        ),
    )
}

fn data_files(dir: &Path, out: &mut Vec<std::path::PathBuf>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            data_files(&p, out);
        } else if p.file_name().unwrap() != "manifest.json" {
            out.push(p);
        }
    }
}

fn determinism(tmp: &Path) -> Outcome {
    let dir = tmp.join("determinism");
    let s = write_synthetic(&dir, &PlantedParams::default(), 7).unwrap();
    let mut cfg = PipelineConfig::load(&s.config).unwrap();
    let mut sets = Vec::new();
    for name in ["a", "b"] {
        cfg.out_dir = dir.join(name);
        run_pipeline(&cfg).unwrap();
        let mut files = Vec::new();
        data_files(&cfg.out_dir, &mut files);
        files.sort();
        sets.push(files);
    }
    let differing: Vec<String> = sets[0]
        .iter()
        .zip(&sets[1])
        .filter(|(x, y)| fs::read(x).ok() != fs::read(y).ok())
        .map(|(x, _)| x.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    outcome(
        sets[0].len() == sets[1].len() && differing.is_empty(),
        format!("{} data files compared, {} differ {:?}", sets[0].len(), differing.len(), differing),
    )
}

fn throughput(tmp: &Path) -> Outcome {
    // ~4250 corridor walkers at 10 Hz over an hour
    let mut r = rng(8);
    let walkers: Vec<WalkerSpec> = (0..4250u64)
        .map(|i| WalkerSpec {
            pids: vec![i + 1],
            entry_ms: i as i64 * 850,
            speed_mm_s: r.random_range(1000.0..1500.0),
            direction: if i % 2 == 0 { Direction::East } else { Direction::West },
            lane_y_mm: r.random_range(300.0..4700.0),
            offset_mm: 0.0,
        })
        .collect();
    let spec = ScenarioSpec {
        corridor_length_mm: 55_000.0,
        corridor_width_mm: 5000.0,
        start_ms: 1_365_994_800_000,
        sample_interval_ms: 100,
        noise_sigma_mm: 30.0,
        walkers,
    };
    let scenario = generate_synthetic_scenario(&spec, 8).unwrap();
    let dir = tmp.join("throughput");
    fs::create_dir_all(&dir).unwrap();
    let (tracking, env) = (dir.join("tracking.csv"), dir.join("env.json"));
    scenario.write_tracking(BufWriter::new(File::create(&tracking).unwrap())).unwrap();
    scenario.write_geometry(File::create(&env).unwrap()).unwrap();
    let records: usize = scenario.trajectories.values().map(|t| t.points.len()).sum();
    drop(scenario);

    let start = Instant::now();
    let ingested = ingest_stage(&tracking, None, &env).unwrap();
    let (prepared, _) = bin_stage(ingested.trajectories.values(), &BinningConfig::default());
    let big = start.elapsed().as_secs_f64();

    let small_dir = tmp.join("throughput-small");
    let s = write_synthetic(&small_dir, &PlantedParams::default(), 7).unwrap();
    let cfg = PipelineConfig::load(&s.config).unwrap();
    let start = Instant::now();
    run_pipeline(&cfg).unwrap();
    let small = start.elapsed().as_secs_f64();
    outcome(
        records >= 1_900_000 && big < 60.0 && small < 10.0,
        format!(
            "ingest+bin of {records} records in {big:.1}s ({} bins); 40-agent pipeline in {small:.2}s",
            prepared.bins.len()
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let t = tmp.path();
    let mut all_pass = true;
    let mut line = |n: u32, name: &str, o: Outcome| {
        all_pass &= o.pass;
        println!("{} criterion {n} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    line(1, "geometry oracles", geometry_oracles());
    line(2, "dtw oracle", dtw_oracle_check());
    line(3, "classifier correctness", classifier_checks());
    line(4, "planted-flock recovery", planted_recovery(t));
    println!("INFO criterion 4 robustness: {}", planted_sweep(t));
    match atc_structure() {
        Some(o) => line(4, "real-data structure", o),
        None => println!("SKIP criterion 4 real-data structure: set CROWDFLOCK_ATC_TRACKING to the ATC day file"),
    }
    line(5, "union-find equivalence", union_find_equivalence());
    line(6, "metric properties", metric_properties());
    line(7, "determinism", determinism(t));
    line(8, "throughput", throughput(t));
    if !all_pass {
        std::process::exit(1);
    }
}
