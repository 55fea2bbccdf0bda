use super::{DtwConvention, PairFeatures, PairRecord};
use crate::io_util::{comment_value, csv_reader, leading_comments, schema_comment};
use crate::{Pid, PidPair};
use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, Write};

/// Feature convention carried alongside a features file and into trained models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub rate_hz: f64,
    pub seq_len: usize,
    pub dtw: DtwConvention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub meta: FeatureMeta,
    pub rows: Vec<PairRecord>,
}

fn dtw_name(c: DtwConvention) -> &'static str {
    match c {
        DtwConvention::Accumulated => "accumulated",
        DtwConvention::CombinedLength => "combined_length",
    }
}

pub fn write_features<W: Write>(mut w: W, rows: &[PairRecord], meta: &FeatureMeta) -> io::Result<()> {
    writeln!(
        w,
        "{} rate_hz={} seq_len={} dtw={}",
        schema_comment("pair-features"),
        meta.rate_hz,
        meta.seq_len,
        dtw_name(meta.dtw)
    )?;
    writeln!(w, "bin_index,pid_a,pid_b,{}", PairFeatures::NAMES.join(","))?;
    for r in rows {
        let f = r.features.to_array();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.bin_index,
            r.pair.first(),
            r.pair.second(),
            f[0],
            f[1],
            f[2],
            f[3],
            f[4],
            f[5]
        )?;
    }
    w.flush()
}

fn bad(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn read_features<R: BufRead>(mut r: R) -> io::Result<FeatureFile> {
    let comments = leading_comments(&mut r)?;
    let meta = FeatureMeta {
        rate_hz: comment_value(&comments, "rate_hz").and_then(|v| v.parse().ok()).unwrap_or(3.0),
        seq_len: comment_value(&comments, "seq_len").and_then(|v| v.parse().ok()).unwrap_or(0),
        dtw: match comment_value(&comments, "dtw") {
            Some("combined_length") => DtwConvention::CombinedLength,
            _ => DtwConvention::Accumulated,
        },
    };
    let mut rows = Vec::new();
    for (i, rec) in csv_reader(r).records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.get(0) == Some("bin_index") {
            continue;
        }
        let row = i + 1;
        if rec.len() != 9 {
            return Err(bad(format!("features row {row}: expected 9 fields, got {}", rec.len())));
        }
        let int = |k: usize| -> io::Result<u64> {
            rec[k].parse().map_err(|_| bad(format!("features row {row}: bad integer {:?}", &rec[k])))
        };
        let mut v = [0.0; 6];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec[3 + k]
                .parse()
                .map_err(|_| bad(format!("features row {row}: bad number {:?}", &rec[3 + k])))?;
        }
        let (a, b) = (int(1)? as Pid, int(2)? as Pid);
        let pair = PidPair::new(a, b).ok_or_else(|| bad(format!("features row {row}: self pair {a}")))?;
        rows.push(PairRecord {
            bin_index: int(0)? as usize,
            pair,
            features: PairFeatures::from_array(v),
        });
    }
    Ok(FeatureFile { meta, rows })
}
