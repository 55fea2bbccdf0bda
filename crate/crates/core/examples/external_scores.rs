//! Plug in probabilities from another model: write a pair-scores CSV and run
//! the pipeline with `classifier = "external-scores"`.
//!
//! Here the "external model" is a toy rule (close, same start, same heading)
//! applied to the pipeline's own features file.

use crowdflock::pairfeat::read_features;
use crowdflock::pipeline::{run_pipeline, write_synthetic, ClassifierMode, PlantedParams};
use crowdflock::pipeline::PipelineConfig;
use std::error::Error;
use std::fs::File;
use std::io::{BufReader, Write};

fn main() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join("crowdflock-external");
    let synth = write_synthetic(&dir, &PlantedParams::default(), 11)?;
    let mut cfg = PipelineConfig::load(&synth.config)?;
    run_pipeline(&cfg)?;

    let feats = read_features(BufReader::new(File::open(cfg.out_dir.join("features.csv"))?))?;
    let path = dir.join("external.csv");
    let mut w = File::create(&path)?;
    writeln!(w, "bin_index,pid_a,pid_b,probability")?;
    for r in &feats.rows {
        let f = r.features;
        let close = f.mean_inter_distance_mm < 1000.0 && f.start_time_diff_s < 1.0 && f.motion_angle_diff_rad < 0.3;
        writeln!(w, "{},{},{},{}", r.bin_index, r.pair.first(), r.pair.second(), if close { 0.99 } else { 0.01 })?;
    }
    drop(w);

    cfg.classifier = ClassifierMode::ExternalScores;
    cfg.scores = Some(path);
    cfg.out_dir = dir.join("out-external");
    let manifest = run_pipeline(&cfg)?;
    for s in &manifest.stages {
        println!("{:<9} {:?} {}", s.name, s.status, serde_json::to_string(&s.counts)?);
    }
    Ok(())
}
