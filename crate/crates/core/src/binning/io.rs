use super::{empty_bins, BinningConfig, TimeBin, TrajectoryWindow};
use crate::ingest::TrajectoryPoint;
use crate::io_util::{comment_value, csv_reader, leading_comments, schema_comment};
use crate::Pid;
use std::io::{self, BufRead, Write};

const HEADER: &str =
    "bin_index,pid,sample,t_ms,x_mm,y_mm,speed_mm_s,motion_angle_rad,facing_angle_rad";

/// Contents of a bins file.
#[derive(Debug, Clone, PartialEq)]
pub struct BinsFile {
    pub config: BinningConfig,
    pub origin_ms: i64,
    pub bins: Vec<TimeBin>,
}

/// One row per window sample; empty bins are recorded through `n_bins`.
pub fn write_bins<W: Write>(
    mut w: W,
    bins: &[TimeBin],
    config: &BinningConfig,
    origin_ms: i64,
) -> io::Result<()> {
    writeln!(
        w,
        "{} interval_ms={} rate_hz={} seq_len={} origin_ms={} n_bins={}",
        schema_comment("bins"),
        config.interval_ms,
        config.rate_hz,
        config.seq_len,
        origin_ms,
        bins.len()
    )?;
    writeln!(w, "{HEADER}")?;
    for b in bins {
        for win in &b.windows {
            for (k, s) in win.samples.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    b.bin_index,
                    win.pid,
                    k,
                    s.t_ms,
                    s.x_mm,
                    s.y_mm,
                    s.speed_mm_s,
                    s.motion_angle_rad,
                    s.facing_angle_rad
                )?;
            }
        }
    }
    w.flush()
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn meta<T: std::str::FromStr>(comments: &[String], key: &str) -> io::Result<T> {
    comment_value(comments, key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(format!("bins file is missing `{key}` in its schema line")))
}

pub fn read_bins<R: BufRead>(mut r: R) -> io::Result<BinsFile> {
    let comments = leading_comments(&mut r)?;
    let config = BinningConfig {
        interval_ms: meta(&comments, "interval_ms")?,
        rate_hz: meta(&comments, "rate_hz")?,
        seq_len: meta(&comments, "seq_len")?,
    };
    let origin_ms: i64 = meta(&comments, "origin_ms")?;
    let n_bins: usize = meta(&comments, "n_bins")?;
    let mut bins = empty_bins(n_bins, config.interval_ms, origin_ms);

    for (i, rec) in csv_reader(r).records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.get(0) == Some("bin_index") {
            continue;
        }
        let row = i + 1;
        if rec.len() != 9 {
            return Err(bad(format!("bins row {row}: expected 9 fields, got {}", rec.len())));
        }
        let f = |k: usize| -> io::Result<f64> {
            rec[k].parse().map_err(|_| bad(format!("bins row {row}: bad number {:?}", &rec[k])))
        };
        let int = |k: usize| -> io::Result<i64> {
            rec[k].parse().map_err(|_| bad(format!("bins row {row}: bad integer {:?}", &rec[k])))
        };
        let bin_index = int(0)? as usize;
        let pid = int(1)? as Pid;
        let sample = TrajectoryPoint {
            t_ms: int(3)?,
            x_mm: f(4)?,
            y_mm: f(5)?,
            speed_mm_s: f(6)?,
            motion_angle_rad: f(7)?,
            facing_angle_rad: f(8)?,
        };
        let bin = bins
            .get_mut(bin_index)
            .ok_or_else(|| bad(format!("bins row {row}: bin {bin_index} >= n_bins {n_bins}")))?;
        match bin.windows.last_mut() {
            Some(w) if w.pid == pid => w.samples.push(sample),
            _ => bin.windows.push(TrajectoryWindow {
                pid,
                bin_index,
                samples: vec![sample],
                rate_hz: config.rate_hz,
            }),
        }
    }
    Ok(BinsFile { config, origin_ms, bins })
}
