//! Command-line front end. Every stage reads and writes the same files as
//! `run`, so `--out` can point at one directory for a hand-chained run.

use clap::{Args, Parser, Subcommand};
use crowdflock::binning::BinningConfig;
use crowdflock::classifier::{TrainConfig, DEFAULT_EDGE_THRESHOLD};
use crowdflock::ingest::{annotation_pair_set, parse_tracking_csv, write_tracking_csv};
use crowdflock::metrics::{analyze_bins, write_analysis, EncounterConfig, MetricsConfig};
use crowdflock::pairfeat::{DtwConvention, FeatureConfig};
use crowdflock::pipeline::{self as p, PipelineConfig, PipelineError, PlantedParams};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crowdflock", version, about = "Detect walking groups in pedestrian tracking data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse tracking, annotations and geometry; drop points outside the boundary.
    Ingest {
        #[arg(long)]
        tracking: PathBuf,
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resample to a fixed rate and cut into time bins.
    Bin {
        #[arg(long)]
        tracking: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        binning: BinArgs,
    },
    /// Six pair features for every co-present pair in every bin.
    Features {
        #[arg(long)]
        bins: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "accumulated")]
        dtw: Dtw,
    },
    /// Fit the logistic pair scorer on annotated pairs.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        groups: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
        lr: f64,
        #[arg(long, default_value_t = TrainConfig::default().max_epochs)]
        epochs: usize,
        #[arg(long, default_value_t = TrainConfig::default().patience)]
        patience: usize,
        #[arg(long, default_value_t = 0.8)]
        split_ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Apply a saved model to a feature file.
    Score {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Threshold scores and cluster confident pairs into flocks.
    Detect {
        #[arg(long)]
        scores: PathBuf,
        /// Bins file defining who is present; without it only scored pids are known.
        #[arg(long)]
        bins: Option<PathBuf>,
        /// Annotations to validate against.
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EDGE_THRESHOLD)]
        threshold: f64,
    },
    /// Space-utilization and encounter metrics.
    Analyze {
        #[arg(long)]
        bins: PathBuf,
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = EncounterConfig::default().d_enc_mm)]
        d_enc_mm: f64,
        #[arg(long, default_value_t = EncounterConfig::default().hysteresis_mm)]
        hysteresis_mm: f64,
        #[arg(long, default_value_t = EncounterConfig::default().window)]
        window: usize,
        #[arg(long, default_value_t = 500.0)]
        cell_mm: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Every stage from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Write a planted-pairs corridor scenario and a matching pipeline.toml.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = PlantedParams::default().pairs)]
        pairs: usize,
        #[arg(long, default_value_t = PlantedParams::default().singles)]
        singles: usize,
        #[arg(long, default_value_t = PlantedParams::default().offset_mm)]
        offset_mm: f64,
        #[arg(long, default_value_t = PlantedParams::default().noise_sigma_mm)]
        noise_mm: f64,
    },
}

#[derive(Args)]
struct BinArgs {
    #[arg(long, default_value_t = 60.0)]
    interval_s: f64,
    #[arg(long, default_value_t = 60)]
    seq_len: usize,
    #[arg(long, default_value_t = 3.0)]
    rate_hz: f64,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Dtw {
    Accumulated,
    CombinedLength,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crowdflock: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn usage(msg: &str) -> PipelineError {
    PipelineError::Config(msg.to_string())
}

fn dispatch(cmd: Command) -> Result<(), PipelineError> {
    match cmd {
        Command::Ingest { tracking, env, groups, out } => {
            let r = p::ingest_stage(&tracking, groups.as_deref(), &env)?;
            p::write_json("ingest", &out.join("ingest_summary.json"), "ingest-summary", &r.summary)?;
            let path = out.join("tracking_filtered.csv");
            write_tracking_csv(p::create("ingest", &path)?, r.trajectories.values())
                .map_err(|e| PipelineError::stage("ingest", e.to_string()))?;
            let s = &r.summary;
            println!(
                "{} agents, {} records ({} malformed rows, {} points outside boundary)",
                s.filtered.agents, s.filtered.total_records, s.malformed_rows, s.points_outside_boundary
            );
        }
        Command::Bin { tracking, out, binning } => {
            let cfg = BinningConfig {
                interval_ms: (binning.interval_s * 1000.0).round() as i64,
                rate_hz: binning.rate_hz,
                seq_len: binning.seq_len,
            };
            if !(cfg.interval_ms > 0 && cfg.rate_hz > 0.0 && cfg.seq_len >= 2) {
                return Err(usage("need interval_s > 0, rate_hz > 0 and seq_len >= 2"));
            }
            let parsed = parse_tracking_csv(p::open("bin", &tracking)?)
                .map_err(|e| PipelineError::input("bin", format!("{}: {e}", tracking.display())))?;
            let (prepared, summary) = p::bin_stage(parsed.trajectories.values(), &cfg);
            p::write_bins_file("bin", &out.join("bins.csv"), &prepared)?;
            p::write_json("bin", &out.join("bin_stats.json"), "bin-stats", &summary)?;
            println!(
                "{} bins, {} agents kept, {} too short",
                summary.stats.bins, summary.stats.total_agents, summary.too_short
            );
        }
        Command::Features { bins, out, dtw } => {
            let loaded = p::load_bins("features", &bins)?;
            let cfg = FeatureConfig {
                dtw: match dtw {
                    Dtw::Accumulated => DtwConvention::Accumulated,
                    Dtw::CombinedLength => DtwConvention::CombinedLength,
                },
            };
            let (table, meta) = p::features_stage(&loaded.bins, &loaded.config, &cfg);
            p::write_features_file("features", &out.join("features.csv"), &table.rows, &meta)?;
            println!("{} pairs, {} skipped", table.rows.len(), table.skipped.len());
        }
        Command::Train { features, groups, out, lr, epochs, patience, split_ratio, seed } => {
            if !(lr > 0.0 && split_ratio > 0.0 && split_ratio < 1.0) {
                return Err(usage("need lr > 0 and 0 < split_ratio < 1"));
            }
            let (rows, meta) = p::load_features("train", &features)?;
            let (annotations, _) = p::load_annotations("train", &groups)?;
            let cfg = TrainConfig { learning_rate: lr, max_epochs: epochs, patience, seed, ..TrainConfig::default() };
            let (model, summary) = p::train_stage(&rows, &annotation_pair_set(&annotations), split_ratio, &cfg, meta)?;
            p::save_model("train", &out.join("model.json"), &model)?;
            p::write_json("train", &out.join("train_report.json"), "train-report", &summary)?;
            let acc = summary.test.as_ref().map(|t| t.accuracy);
            println!(
                "{} balanced pairs ({} train / {} test), {} epochs, test accuracy {}",
                summary.balanced_pairs,
                summary.train_pairs,
                summary.test_pairs,
                summary.report.epochs_run,
                acc.map_or("n/a".to_string(), |a| format!("{a:.3}"))
            );
        }
        Command::Score { features, model, out } => {
            let (rows, meta) = p::load_features("score", &features)?;
            let model = p::load_model("score", &model)?;
            if model.metadata.features != meta {
                log::warn!("model was fitted on {:?}, features are {:?}", model.metadata.features, meta);
            }
            let scores = p::score_stage(&model, &rows)?;
            p::write_scores_file("score", &out.join("scores.csv"), &scores)?;
            println!("{} pairs scored", scores.len());
        }
        Command::Detect { scores, bins, groups, out, threshold } => {
            if !(0.0..=1.0).contains(&threshold) {
                return Err(usage("threshold must lie in [0, 1]"));
            }
            let scores = p::load_scores("detect", &scores)?;
            let members = match &bins {
                Some(b) => p::members_by_bin(&p::load_bins("detect", b)?.bins),
                None => BTreeMap::new(),
            };
            let (assignments, summary) = p::detect_stage(&members, &scores, threshold)?;
            let path = out.join("assignments.csv");
            crowdflock::flock::write_assignments(p::create("detect", &path)?, &assignments)
                .map_err(|e| PipelineError::stage("detect", e.to_string()))?;
            p::write_json("detect", &out.join("flock_summary.json"), "flock-summary", &summary)?;
            println!("{} agents, {} in {} flocks", summary.total_agents, summary.flock_agents, summary.flocks);
            if let Some(g) = groups {
                let (annotations, _) = p::load_annotations("detect", &g)?;
                let v = p::validate_stage(&assignments, &annotations);
                p::write_json("detect", &out.join("validation.json"), "validation", &v)?;
                if let Some(f1) = v.pair_f1 {
                    println!("pair F1 {f1:.3}");
                }
            }
        }
        Command::Analyze { bins, assignments, env, out, d_enc_mm, hysteresis_mm, window, cell_mm, seed } => {
            let loaded = p::load_bins("analyze", &bins)?;
            let assigned = crowdflock::flock::read_assignments(p::open("analyze", &assignments)?)
                .map_err(|e| PipelineError::input("analyze", format!("{}: {e}", assignments.display())))?;
            let geometry = p::load_geometry("analyze", &env)?;
            let cfg = MetricsConfig {
                encounter: EncounterConfig { d_enc_mm, hysteresis_mm, window },
                cell_mm,
                seed,
            };
            cfg.encounter.validate().map_err(|e| usage(&e.to_string()))?;
            if !(cell_mm > 0.0) {
                return Err(usage("cell_mm must be > 0"));
            }
            let report = analyze_bins(&loaded.bins, &assigned, &geometry, loaded.origin_ms, &cfg)
                .map_err(|e| PipelineError::stage("analyze", e.to_string()))?;
            write_analysis(&out, &report).map_err(|e| PipelineError::stage("analyze", e.to_string()))?;
            println!("{} footprints, {} encounters", report.footprints.len(), report.events.len());
        }
        Command::Run { config, out, seed, threshold } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = threshold {
                cfg.threshold = t;
            }
            let result = p::run_pipeline(&cfg);
            if let Ok(text) = std::fs::read_to_string(cfg.out_dir.join("manifest.json")) {
                if let Ok(m) = serde_json::from_str::<p::RunManifest>(&text) {
                    for s in &m.stages {
                        println!("{:<9} {:<7} {:>8.3}s", s.name, format!("{:?}", s.status).to_uppercase(), s.duration_s);
                    }
                }
            }
            result?;
            println!("outputs in {}", cfg.out_dir.display());
        }
        Command::Synth { out, seed, pairs, singles, offset_mm, noise_mm } => {
            let params = PlantedParams { pairs, singles, offset_mm, noise_sigma_mm: noise_mm, ..Default::default() };
            let s = p::write_synthetic(&out, &params, seed)?;
            println!(
                "{} agents, {} planted groups; run with: crowdflock run --config {}",
                s.agents,
                s.groups_planted,
                s.config.display()
            );
        }
    }
    Ok(())
}
