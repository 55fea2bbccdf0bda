use super::IngestError;
use crate::geom::{wrap_angle, Point2};
use crate::Pid;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Read, Write};

/// One tracked sample of one pedestrian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t_ms: i64,
    pub x_mm: f64,
    pub y_mm: f64,
    pub speed_mm_s: f64,
    pub motion_angle_rad: f64,
    pub facing_angle_rad: f64,
}

impl TrajectoryPoint {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x_mm, self.y_mm)
    }
}

/// Time-ordered samples of one pedestrian. Timestamps are strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub pid: Pid,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn first_t_ms(&self) -> Option<i64> {
        self.points.first().map(|p| p.t_ms)
    }

    pub fn last_t_ms(&self) -> Option<i64> {
        self.points.last().map(|p| p.t_ms)
    }
}

#[derive(Debug, Default)]
pub struct TrackingParse {
    pub trajectories: BTreeMap<Pid, Trajectory>,
    pub rows_read: usize,
    pub malformed_rows: usize,
    /// Rows dropped because their pid already had a sample at that timestamp.
    pub duplicate_timestamps: usize,
    pub header_skipped: bool,
}

impl TrackingParse {
    pub fn total_points(&self) -> usize {
        self.trajectories.values().map(|t| t.points.len()).sum()
    }
}

/// Parses a timestamp column into epoch milliseconds.
///
/// Integers are taken as milliseconds. A value with a decimal point is taken
/// as `seconds.millis` (the tracking export writes Unix time plus
/// milliseconds/1000); digits past the third are rounded.
pub fn parse_timestamp_ms(tok: &str) -> Option<i64> {
    let (neg, body) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, tok),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let ms = match body.split_once('.') {
        None => {
            if !digits(body) {
                return None;
            }
            body.parse::<i64>().ok()?
        }
        Some((int, frac)) => {
            if !(digits(int) || int.is_empty()) || !(digits(frac) || frac.is_empty()) {
                return None;
            }
            if int.is_empty() && frac.is_empty() {
                return None;
            }
            let secs: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
            let fb = frac.as_bytes();
            let mut millis = 0i64;
            for i in 0..3 {
                millis = millis * 10 + fb.get(i).map_or(0, |d| i64::from(d - b'0'));
            }
            if fb.get(3).is_some_and(|&d| d >= b'5') {
                millis += 1;
            }
            secs.checked_mul(1000)?.checked_add(millis)?
        }
    };
    Some(if neg { -ms } else { ms })
}

fn parse_row(line: &str) -> Option<(Pid, TrajectoryPoint)> {
    let mut it = line.split(',').map(str::trim);
    let t_ms = parse_timestamp_ms(it.next()?)?;
    let pid: Pid = it.next()?.parse().ok()?;
    let mut vals = [0.0f64; 5];
    for v in &mut vals {
        *v = it.next()?.parse().ok()?;
        if !v.is_finite() {
            return None;
        }
    }
    if it.next().is_some() || vals[2] < 0.0 {
        return None;
    }
    Some((
        pid,
        TrajectoryPoint {
            t_ms,
            x_mm: vals[0],
            y_mm: vals[1],
            speed_mm_s: vals[2],
            motion_angle_rad: wrap_angle(vals[3]),
            facing_angle_rad: wrap_angle(vals[4]),
        },
    ))
}

fn looks_like_header(line: &str) -> bool {
    line.split(',').any(|tok| tok.trim().parse::<f64>().is_err())
}

/// Streams a 7-column tracking CSV into per-pedestrian trajectories.
///
/// Columns: time, pid, x [mm], y [mm], speed [mm/s], motion angle [rad],
/// facing angle [rad]. A first row containing any non-numeric token is a
/// header and is skipped. Later rows that do not parse are counted in
/// `malformed_rows` and skipped.
pub fn parse_tracking_csv<R: Read>(reader: R) -> Result<TrackingParse, IngestError> {
    let mut rdr = BufReader::with_capacity(1 << 16, reader);
    let mut out = TrackingParse::default();
    let mut by_pid: HashMap<Pid, Vec<TrajectoryPoint>> = HashMap::new();
    let mut buf = Vec::with_capacity(128);
    let mut first_content_row = true;

    loop {
        buf.clear();
        if rdr.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let Ok(line) = std::str::from_utf8(&buf) else {
            out.rows_read += 1;
            out.malformed_rows += 1;
            first_content_row = false;
            continue;
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if first_content_row {
            first_content_row = false;
            if looks_like_header(line) {
                out.header_skipped = true;
                continue;
            }
        }
        out.rows_read += 1;
        match parse_row(line) {
            Some((pid, pt)) => by_pid.entry(pid).or_default().push(pt),
            None => out.malformed_rows += 1,
        }
    }

    for (pid, mut points) in by_pid {
        points.sort_by_key(|p| p.t_ms);
        let before = points.len();
        points.dedup_by_key(|p| p.t_ms);
        out.duplicate_timestamps += before - points.len();
        out.trajectories.insert(pid, Trajectory { pid, points });
    }
    if out.malformed_rows > 0 {
        log::warn!("skipped {} malformed tracking rows", out.malformed_rows);
    }
    Ok(out)
}

/// Writes trajectories back out in the 7-column layout (time as integer ms),
/// after a schema comment line.
pub fn write_tracking_csv<'a, W, I>(mut w: W, trajectories: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Trajectory>,
{
    writeln!(w, "{}", crate::io_util::schema_comment("tracking"))?;
    for tr in trajectories {
        for p in &tr.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                p.t_ms, tr.pid, p.x_mm, p.y_mm, p.speed_mm_s, p.motion_angle_rad, p.facing_angle_rad
            )?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_maps_fields() {
        let got = parse_tracking_csv("1365994800000,101,5000,-2000,1200,0.5,0.6\n".as_bytes()).unwrap();
        let tr = &got.trajectories[&101];
        assert_eq!(tr.points.len(), 1);
        let p = tr.points[0];
        assert_eq!(p.t_ms, 1_365_994_800_000);
        assert_eq!((p.x_mm, p.y_mm), (5000.0, -2000.0));
        assert_eq!(p.speed_mm_s, 1200.0);
        assert_eq!((p.motion_angle_rad, p.facing_angle_rad), (0.5, 0.6));
        assert_eq!(got.malformed_rows, 0);
    }

    #[test]
    fn rows_are_reordered_by_time() {
        let csv = "2000,7,1,1,0,0,0\n1000,7,0,0,0,0,0\n";
        let got = parse_tracking_csv(csv.as_bytes()).unwrap();
        let ts: Vec<i64> = got.trajectories[&7].points.iter().map(|p| p.t_ms).collect();
        assert_eq!(ts, vec![1000, 2000]);
    }

    #[test]
    fn header_and_malformed_rows() {
        let csv = "time,id,x,y,v,a,f\n\
                   1000,1,0,0,0,0,0\n\
                   1100,1,0,0\n\
                   1200,1,abc,0,0,0,0\n\
                   1300,1,0,0,-5,0,0\n\
                   1400,1,0,0,0,0,0,9\n\
                   \n\
                   1500,1,1,1,0,0,0\n";
        let got = parse_tracking_csv(csv.as_bytes()).unwrap();
        assert!(got.header_skipped);
        assert_eq!(got.malformed_rows, 4);
        assert_eq!(got.trajectories[&1].points.len(), 2);
    }

    #[test]
    fn non_numeric_first_row_of_data_is_header_only_once() {
        let csv = "1000,1,0,0,0,0,0\nfoo,1,0,0,0,0,0\n";
        let got = parse_tracking_csv(csv.as_bytes()).unwrap();
        assert!(!got.header_skipped);
        assert_eq!(got.malformed_rows, 1);
    }

    #[test]
    fn angles_are_wrapped() {
        let got = parse_tracking_csv("0,1,0,0,0,4.0,-4.0\n".as_bytes()).unwrap();
        let p = got.trajectories[&1].points[0];
        assert!((p.motion_angle_rad - (4.0 - std::f64::consts::TAU)).abs() < 1e-12);
        assert!((p.facing_angle_rad - (-4.0 + std::f64::consts::TAU)).abs() < 1e-12);
    }

    #[test]
    fn duplicate_timestamps_keep_first() {
        let got = parse_tracking_csv("10,1,1,0,0,0,0\n10,1,2,0,0,0,0\n".as_bytes()).unwrap();
        assert_eq!(got.duplicate_timestamps, 1);
        assert_eq!(got.trajectories[&1].points[0].x_mm, 1.0);
    }

    #[test]
    fn seconds_dot_millis_timestamps() {
        assert_eq!(parse_timestamp_ms("1351651349.547"), Some(1_351_651_349_547));
        assert_eq!(parse_timestamp_ms("1351651349.5"), Some(1_351_651_349_500));
        assert_eq!(parse_timestamp_ms("1351651349.5476"), Some(1_351_651_349_548));
        assert_eq!(parse_timestamp_ms("1365994800000"), Some(1_365_994_800_000));
        assert_eq!(parse_timestamp_ms("12e3"), None);
        assert_eq!(parse_timestamp_ms("."), None);
    }

    struct Broken;
    impl Read for Broken {
        fn read(&mut self, _: &mut [u8]) -> std::io::Result<usize> {
            Err(std::io::Error::other("disk gone"))
        }
    }

    #[test]
    fn unreadable_stream_is_fatal() {
        assert!(matches!(parse_tracking_csv(Broken), Err(IngestError::Io(_))));
    }
}
