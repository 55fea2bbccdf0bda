//! Resample to 3 Hz, cut into one-minute bins and see how the minimum window
//! length thins the population.

use crowdflock::binning::{prepare_bins, BinningConfig};
use crowdflock::pipeline::{generate_synthetic_scenario, PlantedParams, ScenarioSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ScenarioSpec::planted(&PlantedParams::default(), 3);
    let scenario = generate_synthetic_scenario(&spec, 3)?;

    for seq_len in [60, 100, 150] {
        let cfg = BinningConfig { seq_len, ..BinningConfig::default() };
        let prepared = prepare_bins(scenario.trajectories.values(), &cfg);
        let per_bin: Vec<usize> = prepared.bins.iter().map(|b| b.windows.len()).collect();
        println!("seq_len {seq_len:>3}: agents per bin {per_bin:?}, {} windows too short", prepared.too_short);
    }

    let prepared = prepare_bins(scenario.trajectories.values(), &BinningConfig::default());
    let bin = &prepared.bins[0];
    let w = &bin.windows[0];
    println!(
        "\nbin {} starts at {} ms; pid {} has {} samples at {} Hz",
        bin.bin_index,
        bin.t_start_ms,
        w.pid,
        w.len(),
        w.rate_hz
    );
    for s in w.samples.iter().take(4) {
        println!("  t={} x={:.1} y={:.1} v={:.0}", s.t_ms, s.x_mm, s.y_mm, s.speed_mm_s);
    }
    Ok(())
}
