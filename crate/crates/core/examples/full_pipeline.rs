//! Generate the planted scenario and run every stage on it.
//!
//!     cargo run --release --example full_pipeline -- [seed] [learning_rate]

use crowdflock::pipeline::{run_pipeline, write_synthetic, PipelineConfig, PlantedParams};
use std::error::Error;

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let lr: Option<f64> = args.next().map(|s| s.parse()).transpose()?;

    let dir = std::env::temp_dir().join(format!("crowdflock-full-{seed}"));
    let synth = write_synthetic(&dir, &PlantedParams::default(), seed)?;
    println!("{} agents, {} planted groups in {}", synth.agents, synth.groups_planted, dir.display());

    let mut cfg = PipelineConfig::load(&synth.config)?;
    if let Some(lr) = lr {
        cfg.train.learning_rate = lr;
    }
    let manifest = run_pipeline(&cfg)?;
    for s in &manifest.stages {
        println!("{:<9} {:?} {:>8.3}s {}", s.name, s.status, s.duration_s, serde_json::to_string(&s.counts)?);
    }
    let validation = std::fs::read_to_string(cfg.out_dir.join("validation.json"))?;
    println!("{validation}");
    Ok(())
}
