use super::ClassifierError;
use crate::pairfeat::{PairFeatures, PairRecord};
use crate::seeding::{stage, stage_rng};
use crate::PidPair;
use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub bin_index: usize,
    pub pair: PidPair,
    pub features: PairFeatures,
    /// `true` when both pedestrians are annotated as the same group.
    pub label: bool,
}

/// Balanced pair dataset: every annotated within-bin pair as a positive, and as
/// many negatives drawn uniformly (without replacement) from the rest.
pub fn build_training_set(
    rows: &[PairRecord],
    annotation_pairs: &BTreeSet<PidPair>,
    seed: u64,
) -> Result<Vec<LabeledPair>, ClassifierError> {
    let label = |r: &PairRecord, label: bool| LabeledPair {
        bin_index: r.bin_index,
        pair: r.pair,
        features: r.features,
        label,
    };
    let (pos, neg): (Vec<&PairRecord>, Vec<&PairRecord>) = rows
        .iter()
        .filter(|r| r.features.is_finite())
        .partition(|r| annotation_pairs.contains(&r.pair));
    if pos.is_empty() {
        return Err(ClassifierError::NoPositives);
    }
    if neg.len() < pos.len() {
        return Err(ClassifierError::InsufficientNegatives {
            needed: pos.len(),
            available: neg.len(),
        });
    }
    let mut rng = stage_rng(seed, stage::NEGATIVE_SAMPLING);
    let mut picked: Vec<usize> = index::sample(&mut rng, neg.len(), pos.len()).into_vec();
    picked.sort_unstable();

    let mut out: Vec<LabeledPair> = pos.iter().map(|r| label(r, true)).collect();
    out.extend(picked.into_iter().map(|i| label(neg[i], false)));
    out.shuffle(&mut rng);
    Ok(out)
}

/// Stratified seeded split. `round(ratio * n)` samples go to training, with each
/// class contributing within one sample of its proportional share.
pub fn split_train_test(
    pairs: &[LabeledPair],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<LabeledPair>, Vec<LabeledPair>), ClassifierError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(ClassifierError::InvalidRatio(ratio));
    }
    let mut rng = stage_rng(seed, stage::TRAIN_TEST_SPLIT);
    let (mut pos, mut neg): (Vec<LabeledPair>, Vec<LabeledPair>) = pairs.iter().partition(|p| p.label);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let n = pairs.len();
    let n_train = (ratio * n as f64).round() as usize;
    let lo = n_train.saturating_sub(neg.len());
    let hi = n_train.min(pos.len());
    let pos_train = ((ratio * pos.len() as f64).round() as usize).clamp(lo, hi);
    let neg_train = n_train - pos_train;

    let mut train: Vec<LabeledPair> = pos[..pos_train].iter().chain(&neg[..neg_train]).copied().collect();
    let mut test: Vec<LabeledPair> = pos[pos_train..].iter().chain(&neg[neg_train..]).copied().collect();
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((train, test))
}
