use super::encounters::{EncounterEvent, EncounterType};
use serde::{Deserialize, Serialize};

pub const MINUTE_MS: i64 = 60_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub minute: i64,
    pub kind: EncounterType,
    pub count: u64,
}

/// Events per minute and type, counted from `origin_ms` on the event's time of
/// closest approach. Every type gets a row for every minute from 0 (or the
/// earliest event, if earlier) through the later of the last event and
/// `end_ms`.
pub fn interaction_timeline(events: &[EncounterEvent], origin_ms: i64, end_ms: Option<i64>) -> Vec<TimelineRow> {
    let minute = |t: i64| (t - origin_ms).div_euclid(MINUTE_MS);
    let ev_minutes = events.iter().map(|e| minute(e.t_min_ms));
    let first = ev_minutes.clone().min().unwrap_or(0).min(0);
    let last = ev_minutes
        .max()
        .into_iter()
        .chain(end_ms.map(|t| minute(t - 1)))
        .max();
    let Some(last) = last else { return Vec::new() };
    if last < first {
        return Vec::new();
    }
    let width = (last - first + 1) as usize;
    let mut counts = vec![[0u64; 3]; width];
    for e in events {
        let k = EncounterType::ALL.iter().position(|t| *t == e.kind).unwrap_or(0);
        counts[(minute(e.t_min_ms) - first) as usize][k] += 1;
    }
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            EncounterType::ALL
                .iter()
                .zip(c)
                .map(move |(&kind, &count)| TimelineRow { minute: first + i as i64, kind, count })
        })
        .collect()
}

/// Least-squares line `y = intercept + slope * x` and Pearson correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub n: usize,
    /// Absent when fewer than two points or all `x` are equal.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Absent additionally when all `y` are equal.
    pub r: Option<f64>,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> Regression {
    let n = xs.len().min(ys.len());
    let none = Regression { n, slope: None, intercept: None, r: None };
    if n < 2 {
        return none;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return none;
    }
    let slope = sxy / sxx;
    Regression {
        n,
        slope: Some(slope),
        intercept: Some(my - slope * mx),
        r: (syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)),
    }
}

/// Minimum encounter distance regressed on group size over S-G events.
pub fn groupsize_distance_regression(events: &[EncounterEvent]) -> Regression {
    let (xs, ys): (Vec<f64>, Vec<f64>) = events
        .iter()
        .filter(|e| e.kind == EncounterType::SingleGroup)
        .filter_map(|e| Some((e.group_size? as f64, e.min_distance_mm)))
        .unzip();
    ols(&xs, &ys)
}

/// Right-continuous empirical CDF: one `(value, count(<= value) / n)` step per
/// distinct value. Non-finite inputs are dropped.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = frac,
            _ => out.push((x, frac)),
        }
    }
    out
}
