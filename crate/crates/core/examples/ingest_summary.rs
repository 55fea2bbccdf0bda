//! Parse a tracking file, its group annotations and the site geometry, then
//! print what was read. With no arguments a planted scenario is generated.
//!
//!     cargo run --example ingest_summary -- [tracking.csv env.json [groups.txt]]

use crowdflock::ingest::{
    annotation_pair_set, filter_to_boundary, find_asymmetries, parse_environment, parse_group_annotations,
    parse_tracking_csv, summarize_dataset,
};
use crowdflock::pipeline::{write_synthetic, PlantedParams};
use std::error::Error;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    let (tracking, env, groups) = match args.as_slice() {
        [t, e] => (t.clone(), e.clone(), None),
        [t, e, g, ..] => (t.clone(), e.clone(), Some(g.clone())),
        _ => {
            let dir = std::env::temp_dir().join("crowdflock-ingest-demo");
            let s = write_synthetic(&dir, &PlantedParams::default(), 7)?;
            (s.tracking, s.geometry, Some(s.groups))
        }
    };

    let parsed = parse_tracking_csv(BufReader::new(File::open(&tracking)?))?;
    println!(
        "{}: {} rows, {} malformed, {} duplicate timestamps",
        tracking.display(),
        parsed.rows_read,
        parsed.malformed_rows,
        parsed.duplicate_timestamps
    );
    let raw = summarize_dataset(parsed.trajectories.values())?;
    println!("{raw:#?}");

    let geometry = parse_environment(BufReader::new(File::open(&env)?))?;
    println!(
        "boundary {:.1} m2 with {} vertices, {} pillars, {} spots",
        geometry.area_m2(),
        geometry.boundary().len(),
        geometry.pillars().len(),
        geometry.spots().len()
    );
    let inside = filter_to_boundary(parsed.trajectories, &geometry);
    println!(
        "{} points outside the boundary, {} trajectories dropped entirely",
        inside.points_removed, inside.trajectories_dropped
    );

    if let Some(g) = groups {
        let ann = parse_group_annotations(BufReader::new(File::open(&g)?))?;
        println!(
            "{} annotation rows ({} skipped), {} same-group pairs, {} asymmetric rows",
            ann.annotations.len(),
            ann.skipped.len(),
            annotation_pair_set(&ann.annotations).len(),
            find_asymmetries(&ann.annotations).len()
        );
    }
    Ok(())
}
