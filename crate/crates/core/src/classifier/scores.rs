use super::{predict_prob, ClassifierError, PairScoreModel};
use crate::ingest::SkippedRow;
use crate::io_util::{csv_reader, schema_comment};
use crate::pairfeat::{PairFeatures, PairRecord};
use crate::{Pid, PidPair};
use serde::{Deserialize, Serialize};
use std::io::{self, Read, Write};

/// Probability that a within-bin pair belongs to the same group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub bin_index: usize,
    pub pair: PidPair,
    pub probability: f64,
}

/// Anything that can turn pair features into a same-group probability.
pub trait PairScorer {
    fn score(&self, features: &PairFeatures) -> Result<f64, ClassifierError>;
}

impl PairScorer for PairScoreModel {
    fn score(&self, features: &PairFeatures) -> Result<f64, ClassifierError> {
        predict_prob(self, features)
    }
}

/// Scores every row, keeping input order.
pub fn score_pairs<S: PairScorer + ?Sized>(
    scorer: &S,
    rows: &[PairRecord],
) -> Result<Vec<PairScore>, ClassifierError> {
    rows.iter()
        .map(|r| {
            Ok(PairScore {
                bin_index: r.bin_index,
                pair: r.pair,
                probability: scorer.score(&r.features)?,
            })
        })
        .collect()
}

/// Keeps scores with `probability >= tau`.
pub fn threshold_pairs(scores: &[PairScore], tau: f64) -> Vec<PairScore> {
    scores.iter().filter(|s| s.probability >= tau).copied().collect()
}

pub fn write_scores<W: Write>(mut w: W, scores: &[PairScore]) -> io::Result<()> {
    writeln!(w, "{}", schema_comment("pair-scores"))?;
    writeln!(w, "bin_index,pid_a,pid_b,probability")?;
    for s in scores {
        writeln!(w, "{},{},{},{}", s.bin_index, s.pair.first(), s.pair.second(), s.probability)?;
    }
    w.flush()
}

#[derive(Debug, Default)]
pub struct ScoreImport {
    pub scores: Vec<PairScore>,
    pub rejected: Vec<SkippedRow>,
}

fn parse_score(rec: &csv::StringRecord) -> Result<PairScore, String> {
    if rec.len() != 4 {
        return Err(format!("expected 4 fields, got {}", rec.len()));
    }
    let int = |k: usize| rec[k].parse::<u64>().map_err(|_| format!("bad integer {:?}", &rec[k]));
    let bin_index = int(0)? as usize;
    let (a, b) = (int(1)? as Pid, int(2)? as Pid);
    let pair = PidPair::new(a, b).ok_or_else(|| format!("pid {a} paired with itself"))?;
    let probability: f64 = rec[3].parse().map_err(|_| format!("bad probability {:?}", &rec[3]))?;
    if !(0.0..=1.0).contains(&probability) {
        return Err(format!("probability {probability} outside [0, 1]"));
    }
    Ok(PairScore { bin_index, pair, probability })
}

/// Reads `bin_index,pid_a,pid_b,probability` rows from any pair model.
///
/// Pid order is canonicalized; rows with probabilities outside `[0, 1]` or
/// that do not parse are rejected with a warning. A leading header row and
/// `#` comment lines are ignored.
pub fn import_external_scores<R: Read>(reader: R) -> Result<ScoreImport, ClassifierError> {
    let mut out = ScoreImport::default();
    let mut rdr = csv_reader(reader);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ClassifierError::Io(io::Error::new(io::ErrorKind::InvalidData, e)))?;
        if i == 0 && rec.get(0).is_some_and(|f| f.parse::<u64>().is_err()) {
            continue;
        }
        match parse_score(&rec) {
            Ok(s) => out.scores.push(s),
            Err(reason) => {
                let line = rec.position().map_or(i + 1, |p| p.line() as usize);
                log::warn!("scores line {line}: {reason}");
                out.rejected.push(SkippedRow { line, reason });
            }
        }
    }
    Ok(out)
}
