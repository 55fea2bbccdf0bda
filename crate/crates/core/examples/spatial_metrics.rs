//! Hull area, smallest enclosing circle, straightness and an occupancy
//! heatmap for every subject in a planted scenario.

use crowdflock::binning::{prepare_bins, BinningConfig};
use crowdflock::flock::cluster_edges;
use crowdflock::geom::Point2;
use crowdflock::ingest::annotation_pair_set;
use crowdflock::metrics::{
    accumulate_heatmap, convex_hull_area, smallest_enclosing_circle, subject_footprint, subjects_for, BinScene,
};
use crowdflock::pipeline::{generate_synthetic_scenario, PlantedParams, ScenarioSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let square = [Point2::new(0.0, 0.0), Point2::new(1000.0, 0.0), Point2::new(1000.0, 1000.0), Point2::new(0.0, 1000.0)];
    let c = smallest_enclosing_circle(&square, 0).unwrap();
    println!("unit square: hull {} m2, circle r={:.1} mm at {:?}", convex_hull_area(&square), c.radius, c.center);

    let params = PlantedParams { pairs: 3, singles: 5, ..Default::default() };
    let s = generate_synthetic_scenario(&ScenarioSpec::planted(&params, 5), 5)?;
    let bins = prepare_bins(s.trajectories.values(), &BinningConfig::default()).bins;
    let truth = annotation_pair_set(&s.annotations);

    let bin = &bins[0];
    let pids = bin.pids();
    let edges = truth.iter().copied().filter(|p| pids.contains(&p.first()) && pids.contains(&p.second()));
    let assignment = cluster_edges(bin.bin_index, &pids, edges)?;
    let scene = BinScene::from_bin(bin);
    println!("\n{:<9} {:>4} {:>9} {:>9} {:>8} {:>10}", "subject", "n", "hull_m2", "sec_r_mm", "straight", "clear_mm");
    for subject in subjects_for(&assignment, &scene)? {
        let f = subject_footprint(bin, &scene, &subject, 5);
        println!(
            "{:<9} {:>4} {:>9.2} {:>9.0} {:>8.3} {:>10.0}",
            subject.label(),
            f.n_points,
            f.hull_area_m2,
            f.sec_radius_mm,
            f.straightness.unwrap_or(f64::NAN),
            f.mean_clearance_mm.unwrap_or(f64::NAN)
        );
    }

    let points = bins.iter().flat_map(|b| b.windows.iter()).flat_map(|w| w.samples.iter().map(|p| p.position()));
    let grid = accumulate_heatmap(points, &s.geometry, 1000.0)?;
    let (bx, by, n) = (0..grid.nx)
        .flat_map(|x| (0..grid.ny).map(move |y| (x, y)))
        .map(|(x, y)| (x, y, grid.count(x, y)))
        .max_by_key(|c| c.2)
        .unwrap();
    println!("\nheatmap {}x{} cells, {} samples, busiest cell ({bx},{by}) with {n}", grid.nx, grid.ny, grid.total());
    Ok(())
}
