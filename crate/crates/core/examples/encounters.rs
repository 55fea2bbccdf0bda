//! A pair walking east meets two people walking west: encounter episodes,
//! speed and heading changes, the per-minute timeline and ECDFs.

use crowdflock::binning::{prepare_bins, BinningConfig};
use crowdflock::flock::cluster_edges;
use crowdflock::metrics::{
    detect_encounters, ecdf, groupsize_distance_regression, interaction_timeline, subjects_for, BinScene,
    EncounterConfig,
};
use crowdflock::pipeline::{generate_synthetic_scenario, Direction, ScenarioSpec, WalkerSpec};
use crowdflock::PidPair;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let walk = |pids: Vec<u64>, entry_ms, direction, lane_y_mm, speed_mm_s| WalkerSpec {
        pids,
        entry_ms,
        speed_mm_s,
        direction,
        lane_y_mm,
        offset_mm: 600.0,
    };
    let spec = ScenarioSpec {
        corridor_length_mm: 16_000.0,
        corridor_width_mm: 4000.0,
        start_ms: 0,
        sample_interval_ms: 100,
        noise_sigma_mm: 0.0,
        walkers: vec![
            walk(vec![1, 2], 0, Direction::East, 1500.0, 1200.0),
            walk(vec![3], 0, Direction::West, 2400.0, 1300.0),
            walk(vec![4], 2000, Direction::West, 1000.0, 1100.0),
        ],
    };
    let scenario = generate_synthetic_scenario(&spec, 0)?;
    // walks are ~13 s long, so keep 10 s windows
    let cfg = BinningConfig { seq_len: 30, ..BinningConfig::default() };
    let prepared = prepare_bins(scenario.trajectories.values(), &cfg);
    let bin = &prepared.bins[0];
    let assignment = cluster_edges(bin.bin_index, &bin.pids(), [PidPair::new(1, 2).unwrap()])?;
    let scene = BinScene::from_bin(bin);
    let subjects = subjects_for(&assignment, &scene)?;
    let events = detect_encounters(&scene, &subjects, &EncounterConfig { window: 6, ..EncounterConfig::default() })?;

    for e in &events {
        println!(
            "{} {} vs {}: {}..{} ms, closest {:.0} mm at t={} ms, dv {:?}/{:?}, dtheta {:?}/{:?}",
            e.kind,
            e.a.label(),
            e.b.label(),
            e.start_ms,
            e.end_ms,
            e.min_distance_mm,
            e.t_min_ms,
            e.delta_v_a.map(|v| v.round()),
            e.delta_v_b.map(|v| v.round()),
            e.delta_theta_a.map(|v| (v * 1000.0).round() / 1000.0),
            e.delta_theta_b.map(|v| (v * 1000.0).round() / 1000.0),
        );
    }
    for row in interaction_timeline(&events, prepared.origin_ms, None) {
        println!("minute {} {}: {}", row.minute, row.kind, row.count);
    }
    let d: Vec<f64> = events.iter().map(|e| e.min_distance_mm).collect();
    println!("ECDF of closest distances {:?}", ecdf(&d));
    println!("group size vs distance: {:?}", groupsize_distance_regression(&events));
    Ok(())
}
