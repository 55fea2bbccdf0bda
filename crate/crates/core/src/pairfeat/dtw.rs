use crate::geom::Point2;

/// Classic DTW between two point sequences.
///
/// Local cost is the Euclidean distance, steps are `(1,0)`, `(0,1)`, `(1,1)`,
/// there is no band constraint and no normalization: the result is the
/// accumulated cost of the cheapest warping path. Uses two rolling rows.
/// Returns `None` if either sequence is empty.
pub fn dtw(a: &[Point2], b: &[Point2]) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for &pa in a {
        cur[0] = f64::INFINITY;
        for (j, &pb) in b.iter().enumerate() {
            let best = prev[j + 1].min(cur[j]).min(prev[j]);
            cur[j + 1] = pa.distance(pb) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Some(prev[m])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_zero() {
        let a: Vec<Point2> = (0..7).map(|i| Point2::new(i as f64, (i * i) as f64)).collect();
        assert_eq!(dtw(&a, &a), Some(0.0));
    }

    #[test]
    fn single_points() {
        assert_eq!(dtw(&[Point2::new(0.0, 0.0)], &[Point2::new(3.0, 4.0)]), Some(5.0));
        assert_eq!(dtw(&[], &[Point2::new(3.0, 4.0)]), None);
    }

    #[test]
    fn warping_absorbs_repeats() {
        let a = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        let b = [
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 0.0),
        ];
        assert_eq!(dtw(&a, &b), Some(0.0));
    }
}
