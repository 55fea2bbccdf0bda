//! Balanced training set, stratified split and the logistic pair scorer at
//! two step sizes.

use crowdflock::binning::{prepare_bins, BinningConfig};
use crowdflock::classifier::{build_training_set, evaluate, split_train_test, train_logistic, TrainConfig};
use crowdflock::ingest::annotation_pair_set;
use crowdflock::pairfeat::{extract_all_pairs, FeatureConfig, FeatureMeta};
use crowdflock::pipeline::{generate_synthetic_scenario, PlantedParams, ScenarioSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 7;
    let params = PlantedParams { pairs: 30, singles: 60, ..Default::default() };
    let scenario = generate_synthetic_scenario(&ScenarioSpec::planted(&params, seed), seed)?;
    let binning = BinningConfig::default();
    let bins = prepare_bins(scenario.trajectories.values(), &binning).bins;
    let features = FeatureConfig::default();
    let table = extract_all_pairs(&bins, &features);
    let meta = FeatureMeta { rate_hz: binning.rate_hz, seq_len: binning.seq_len, dtw: features.dtw };

    let balanced = build_training_set(&table.rows, &annotation_pair_set(&scenario.annotations), seed)?;
    let (train, test) = split_train_test(&balanced, 0.8, seed)?;
    println!("{} candidate pairs -> {} balanced, {} train / {} test", table.rows.len(), balanced.len(), train.len(), test.len());

    for lr in [0.001, 0.02] {
        let cfg = TrainConfig { learning_rate: lr, seed, ..TrainConfig::default() };
        let (model, report) = train_logistic(&train, &cfg, meta)?;
        let m = evaluate(&model, &test)?;
        println!(
            "lr {lr}: {} epochs (best {}), loss {:.3} -> {:.3}, test acc {:.3} f1 {:?}",
            report.epochs_run, report.best_epoch, report.initial_train_loss, report.final_train_loss, m.accuracy, m.f1
        );
        println!("  weights {:?}", model.params.weights.map(|w| (w * 1000.0).round() / 1000.0));
    }
    Ok(())
}
