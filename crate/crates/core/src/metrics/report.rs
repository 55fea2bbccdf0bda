use super::encounters::{detect_encounters, subjects_for, EncounterConfig, EncounterEvent, EncounterType, Subject, SubjectKind};
use super::scene::BinScene;
use super::spatial::{accumulate_heatmap, convex_hull_area, smallest_enclosing_circle, trajectory_straightness, HeatmapGrid};
use super::stats::{ecdf, groupsize_distance_regression, interaction_timeline, Regression, TimelineRow};
use super::MetricsError;
use crate::binning::TimeBin;
use crate::flock::FlockAssignment;
use crate::geom::Point2;
use crate::ingest::EnvironmentGeometry;
use crate::io_util::schema_comment;
use crate::SCHEMA_VERSION;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub encounter: EncounterConfig,
    pub cell_mm: f64,
    /// Seeds the enclosing-circle shuffle.
    pub seed: u64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { encounter: EncounterConfig::default(), cell_mm: 500.0, seed: 0 }
    }
}

/// Area covered by one subject's window samples within a bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialFootprint {
    pub bin_index: usize,
    pub subject: Subject,
    pub n_points: usize,
    pub hull_area_m2: f64,
    pub sec_center_mm: Point2,
    pub sec_radius_mm: f64,
    /// Mean over members; absent when no member has two samples.
    pub straightness: Option<f64>,
    /// Some member never moved (its straightness is 1 by convention).
    pub stationary: bool,
    /// Mean over members of their mean per-frame clearance.
    pub mean_clearance_mm: Option<f64>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn subject_footprint(bin: &TimeBin, scene: &BinScene, subject: &Subject, seed: u64) -> SpatialFootprint {
    let windows: Vec<_> = bin
        .windows
        .iter()
        .filter(|w| subject.members.binary_search(&w.pid).is_ok())
        .collect();
    let points: Vec<Point2> = windows.iter().flat_map(|w| w.samples.iter().map(|s| s.position())).collect();
    let straight: Vec<_> = windows
        .iter()
        .filter_map(|w| trajectory_straightness(&w.samples.iter().map(|s| s.position()).collect::<Vec<_>>()))
        .collect();
    let sec = smallest_enclosing_circle(&points, seed);
    let clearances: Vec<f64> = subject.members.iter().filter_map(|&p| scene.mean_clearance(p)).collect();
    SpatialFootprint {
        bin_index: bin.bin_index,
        subject: subject.clone(),
        n_points: points.len(),
        hull_area_m2: convex_hull_area(&points),
        sec_center_mm: sec.map_or(Point2::default(), |c| c.center),
        sec_radius_mm: sec.map_or(0.0, |c| c.radius),
        straightness: mean(&straight.iter().map(|s| s.value).collect::<Vec<_>>()),
        stationary: straight.iter().any(|s| s.stationary),
        mean_clearance_mm: mean(&clearances),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub config: MetricsConfig,
    pub footprints: Vec<SpatialFootprint>,
    pub heatmap: HeatmapGrid,
    pub events: Vec<EncounterEvent>,
    pub timeline: Vec<TimelineRow>,
    pub ecdf: BTreeMap<EncounterType, Vec<(f64, f64)>>,
    pub regression: Regression,
    /// Pedestrians present in the bins but absent from the assignment; analysed as singles.
    pub unassigned_agents: usize,
}

/// Runs every metric over all bins. Bins without an assignment are treated as
/// all singles. `origin_ms` anchors minute 0 of the timeline.
pub fn analyze_bins(
    bins: &[TimeBin],
    assignments: &[FlockAssignment],
    geometry: &EnvironmentGeometry,
    origin_ms: i64,
    cfg: &MetricsConfig,
) -> Result<AnalysisReport, MetricsError> {
    cfg.encounter.validate()?;
    let heatmap = accumulate_heatmap(
        bins.iter().flat_map(|b| &b.windows).flat_map(|w| w.samples.iter().map(|s| s.position())),
        geometry,
        cfg.cell_mm,
    )?;
    let by_bin: BTreeMap<usize, &FlockAssignment> = assignments.iter().map(|a| (a.bin_index, a)).collect();
    if let Some(&missing) = by_bin.keys().find(|k| !bins.iter().any(|b| b.bin_index == **k)) {
        return Err(MetricsError::MissingBin(missing));
    }
    let per_bin: Vec<(Vec<SpatialFootprint>, Vec<EncounterEvent>, usize)> = bins
        .par_iter()
        .map(|bin| {
            let scene = BinScene::from_bin(bin);
            let empty = FlockAssignment { bin_index: bin.bin_index, groups: vec![], singles: vec![] };
            let assignment = by_bin.get(&bin.bin_index).copied().unwrap_or(&empty);
            let subjects = subjects_for(assignment, &scene)?;
            let unassigned = bin.windows.len() - assignment.agent_count();
            let fps = subjects.iter().map(|s| subject_footprint(bin, &scene, s, cfg.seed)).collect();
            let events = detect_encounters(&scene, &subjects, &cfg.encounter)?;
            Ok((fps, events, unassigned))
        })
        .collect::<Result<_, MetricsError>>()?;
    let mut footprints = Vec::new();
    let mut events = Vec::new();
    let mut unassigned_agents = 0;
    for (f, e, u) in per_bin {
        footprints.extend(f);
        events.extend(e);
        unassigned_agents += u;
    }
    let end_ms = bins.iter().map(|b| b.t_end_ms).max();
    let timeline = interaction_timeline(&events, origin_ms, end_ms);
    let ecdf = EncounterType::ALL
        .iter()
        .map(|&t| {
            let d: Vec<f64> = events.iter().filter(|e| e.kind == t).map(|e| e.min_distance_mm).collect();
            (t, ecdf(&d))
        })
        .collect();
    Ok(AnalysisReport {
        config: *cfg,
        regression: groupsize_distance_regression(&events),
        footprints,
        heatmap,
        events,
        timeline,
        ecdf,
        unassigned_agents,
    })
}

#[derive(Serialize)]
struct RegressionFile {
    schema: String,
    x: &'static str,
    y: &'static str,
    events: &'static str,
    #[serde(flatten)]
    regression: Regression,
    d_enc_mm: f64,
    hysteresis_mm: f64,
    window: usize,
    cell_mm: f64,
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn members(s: &Subject) -> String {
    s.members.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";")
}

fn kind(s: &Subject) -> &'static str {
    match s.kind {
        SubjectKind::Single => "SINGLE",
        SubjectKind::Group => "GROUP",
    }
}

fn create(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> io::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = BufWriter::new(File::create(&path)?);
    written.push(path);
    Ok(f)
}

/// Writes footprints.csv, heatmap.csv, encounters.csv, timeline.csv,
/// ecdf_{ss,sg,gg}.csv and regression.json into `dir`.
pub fn write_analysis(dir: &Path, report: &AnalysisReport) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let mut w = create(dir, "footprints.csv", &mut written)?;
    writeln!(w, "{}", schema_comment("footprints"))?;
    writeln!(w, "bin_index,subject,kind,members,n_points,hull_area_m2,sec_center_x_mm,sec_center_y_mm,sec_radius_mm,straightness,stationary,mean_clearance_mm")?;
    for f in &report.footprints {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            f.bin_index,
            f.subject.label(),
            kind(&f.subject),
            members(&f.subject),
            f.n_points,
            f.hull_area_m2,
            f.sec_center_mm.x,
            f.sec_center_mm.y,
            f.sec_radius_mm,
            opt(f.straightness),
            f.stationary,
            opt(f.mean_clearance_mm)
        )?;
    }
    w.flush()?;

    let h = &report.heatmap;
    let mut w = create(dir, "heatmap.csv", &mut written)?;
    writeln!(
        w,
        "{} cell_mm={} origin_x_mm={} origin_y_mm={} nx={} ny={}",
        schema_comment("heatmap"),
        h.cell_mm,
        h.origin.x,
        h.origin.y,
        h.nx,
        h.ny
    )?;
    writeln!(w, "cell_x,cell_y,count,log10")?;
    for iy in 0..h.ny {
        for ix in 0..h.nx {
            writeln!(w, "{},{},{},{}", ix, iy, h.count(ix, iy), opt(h.log_density(ix, iy)))?;
        }
    }
    w.flush()?;

    let mut w = create(dir, "encounters.csv", &mut written)?;
    let e = &report.config.encounter;
    writeln!(
        w,
        "{} d_enc_mm={} hysteresis_mm={} window={}",
        schema_comment("encounters"),
        e.d_enc_mm,
        e.hysteresis_mm,
        e.window
    )?;
    writeln!(w, "bin_index,type,subject_a,members_a,subject_b,members_b,start_ms,end_ms,t_min_ms,min_distance_mm,location_x_mm,location_y_mm,delta_v_a_mm_s,delta_v_b_mm_s,delta_theta_a_rad,delta_theta_b_rad,group_size")?;
    for ev in &report.events {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            ev.bin_index,
            ev.kind,
            ev.a.label(),
            members(&ev.a),
            ev.b.label(),
            members(&ev.b),
            ev.start_ms,
            ev.end_ms,
            ev.t_min_ms,
            ev.min_distance_mm,
            ev.location_mm.x,
            ev.location_mm.y,
            opt(ev.delta_v_a),
            opt(ev.delta_v_b),
            opt(ev.delta_theta_a),
            opt(ev.delta_theta_b),
            ev.group_size.map_or(String::new(), |g| g.to_string())
        )?;
    }
    w.flush()?;

    let mut w = create(dir, "timeline.csv", &mut written)?;
    writeln!(w, "{}", schema_comment("timeline"))?;
    writeln!(w, "minute,type,count")?;
    for r in &report.timeline {
        writeln!(w, "{},{},{}", r.minute, r.kind, r.count)?;
    }
    w.flush()?;

    for (t, steps) in &report.ecdf {
        let tag = t.as_str().replace('-', "").to_lowercase();
        let mut w = create(dir, &format!("ecdf_{tag}.csv"), &mut written)?;
        writeln!(w, "{} type={}", schema_comment("ecdf"), t)?;
        writeln!(w, "min_distance_mm,fraction")?;
        for (x, f) in steps {
            writeln!(w, "{x},{f}")?;
        }
        w.flush()?;
    }

    let mut w = create(dir, "regression.json", &mut written)?;
    let json = RegressionFile {
        schema: format!("crowdflock.regression.{SCHEMA_VERSION}"),
        x: "group_size",
        y: "min_distance_mm",
        events: "S-G",
        regression: report.regression,
        d_enc_mm: e.d_enc_mm,
        hysteresis_mm: e.hysteresis_mm,
        window: e.window,
        cell_mm: report.config.cell_mm,
    };
    serde_json::to_writer_pretty(&mut w, &json)?;
    writeln!(w)?;
    w.flush()?;
    Ok(written)
}
