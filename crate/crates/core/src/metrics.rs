//! Quality indicators and comparison statistics.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::instance::ReferenceFront;
use crate::Point;

/// Reference point used for the inverted hypervolume, in normalized space.
pub const IH_REFERENCE: Point = [1.2, 1.2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("{0} point set is empty")]
    Empty(&'static str),
    #[error("rank-sum test needs at least two observations per sample")]
    SampleSize,
    #[error("mean-rank matrix rows have different lengths")]
    Ragged,
}

/// Per-objective affine scaling taken from a reference front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    /// Bounds of `[risk, -return]` over the reference front.
    pub fn from_reference(front: &ReferenceFront) -> Self {
        Self::from_points(&front.minimization_points())
    }

    pub fn from_points(points: &[Point]) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        Self { min, max }
    }

    /// Maps `p` so the reference front spans `[0, 1]^2`. Points outside are
    /// not clipped. A zero-width objective is shifted but not scaled.
    pub fn normalize(&self, p: &Point) -> Point {
        let mut out = [0.0; 2];
        for k in 0..2 {
            let range = self.max[k] - self.min[k];
            let range = if range > 0.0 { range } else { 1.0 };
            out[k] = (p[k] - self.min[k]) / range;
        }
        out
    }

    pub fn normalize_all(&self, points: &[Point]) -> Vec<Point> {
        points.iter().map(|p| self.normalize(p)).collect()
    }
}

/// Normalized minimization-space view of a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFront {
    pub points: Vec<Point>,
    pub bounds: Bounds,
}

impl NormalizedFront {
    pub fn new(points: &[Point], bounds: Bounds) -> Self {
        Self {
            points: bounds.normalize_all(points),
            bounds,
        }
    }
}

fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    libm::sqrt(dx * dx + dy * dy)
}

/// Mean over reference points of the distance to the nearest obtained point.
pub fn igd(obtained: &[Point], reference: &[Point]) -> Result<f64, MetricError> {
    if obtained.is_empty() {
        return Err(MetricError::Empty("obtained"));
    }
    if reference.is_empty() {
        return Err(MetricError::Empty("reference"));
    }
    let total: f64 = reference
        .iter()
        .map(|q| {
            obtained
                .iter()
                .map(|s| distance(q, s))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / reference.len() as f64)
}

/// Area dominated by `points` and bounded by `r` (minimization). Points not
/// strictly better than `r` in both objectives contribute nothing.
pub fn hypervolume_2d(points: &[Point], r: Point) -> f64 {
    let mut inside: Vec<Point> = points
        .iter()
        .copied()
        .filter(|p| p[0] < r[0] && p[1] < r[1])
        .collect();
    inside.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut ceiling = r[1];
    for p in inside {
        if p[1] < ceiling {
            area += (r[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    area
}

/// Hypervolume shortfall of `obtained` relative to `reference`; both must be
/// normalized already. Negative when the obtained front covers more.
pub fn ih(obtained: &[Point], reference: &[Point], r: Point) -> Result<f64, MetricError> {
    if obtained.is_empty() {
        return Err(MetricError::Empty("obtained"));
    }
    Ok(hypervolume_2d(reference, r) - hypervolume_2d(obtained, r))
}

/// IGD and IH of an obtained minimization front against a reference front,
/// both normalized by the reference bounds.
pub fn indicators(obtained: &[Point], reference: &ReferenceFront) -> Result<(f64, f64), MetricError> {
    let bounds = Bounds::from_reference(reference);
    let r = bounds.normalize_all(&reference.minimization_points());
    let s = bounds.normalize_all(obtained);
    Ok((igd(&s, &r)?, ih(&s, &r, IH_REFERENCE)?))
}

/// Outcome of a two-sided rank-sum comparison, from the first sample's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Better,
    Worse,
    Equal,
}

impl Comparison {
    pub fn symbol(self) -> char {
        match self {
            Comparison::Better => '+',
            Comparison::Worse => '-',
            Comparison::Equal => '=',
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Comparison::Better => Comparison::Worse,
            Comparison::Worse => Comparison::Better,
            Comparison::Equal => Comparison::Equal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSumResult {
    pub outcome: Comparison,
    /// Mann-Whitney U of the first sample.
    pub u: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Average ranks (1-based); ties share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn standard_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); zero for one value.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|x| (x - m) * (x - m)).sum();
    libm::sqrt(ss / (values.len() - 1) as f64)
}

/// Two-sided Wilcoxon rank-sum (Mann-Whitney U) test with the normal
/// approximation, tie correction and a 0.5 continuity correction. Lower
/// values are better: a significant difference with a lower median in `a`
/// is [`Comparison::Better`].
pub fn rank_sum_test(a: &[f64], b: &[f64], alpha: f64) -> Result<RankSumResult, MetricError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(MetricError::SampleSize);
    }
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(variance > 0.0) {
        return Ok(RankSumResult {
            outcome: Comparison::Equal,
            u,
            z: 0.0,
            p_value: 1.0,
        });
    }
    let centered = u - n1 * n2 / 2.0;
    let corrected = (centered.abs() - 0.5).max(0.0);
    let z = corrected / libm::sqrt(variance) * centered.signum();
    let p_value = (2.0 * standard_normal_sf(z.abs())).min(1.0);

    let outcome = if p_value < alpha {
        let (ma, mb) = (median(a), median(b));
        let a_lower = if ma != mb { ma < mb } else { centered < 0.0 };
        if a_lower {
            Comparison::Better
        } else {
            Comparison::Worse
        }
    } else {
        Comparison::Equal
    };
    Ok(RankSumResult {
        outcome,
        u,
        z,
        p_value,
    })
}

/// Mean rank per algorithm. `results[a][i]` is the mean indicator value of
/// algorithm `a` on instance `i`; lower is better, ties share ranks.
pub fn mean_rank(results: &[Vec<f64>]) -> Result<Vec<f64>, MetricError> {
    let n_alg = results.len();
    if n_alg == 0 {
        return Ok(Vec::new());
    }
    let n_inst = results[0].len();
    if results.iter().any(|r| r.len() != n_inst) {
        return Err(MetricError::Ragged);
    }
    let mut totals = vec![0.0; n_alg];
    for i in 0..n_inst {
        let column: Vec<f64> = results.iter().map(|r| r[i]).collect();
        for (t, r) in totals.iter_mut().zip(average_ranks(&column)) {
            *t += r;
        }
    }
    Ok(totals.into_iter().map(|t| t / n_inst as f64).collect())
}

/// Ranks of algorithms on each instance (`ranks[a][i]`).
pub fn rank_matrix(results: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, MetricError> {
    let n_alg = results.len();
    if n_alg == 0 {
        return Ok(Vec::new());
    }
    let n_inst = results[0].len();
    if results.iter().any(|r| r.len() != n_inst) {
        return Err(MetricError::Ragged);
    }
    let mut ranks = vec![vec![0.0; n_inst]; n_alg];
    for i in 0..n_inst {
        let column: Vec<f64> = results.iter().map(|r| r[i]).collect();
        for (a, r) in average_ranks(&column).into_iter().enumerate() {
            ranks[a][i] = r;
        }
    }
    Ok(ranks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::FrontPoint;
    use alloc::vec;

    #[test]
    fn igd_basics() {
        let x = vec![[0.1, 0.9], [0.5, 0.5], [0.9, 0.1]];
        assert_eq!(igd(&x, &x).unwrap(), 0.0);
        assert_eq!(igd(&[[3.0, 4.0]], &[[0.0, 0.0]]).unwrap(), 5.0);
        assert!(igd(&[], &x).is_err());
        assert!(igd(&x, &[]).is_err());
    }

    #[test]
    fn hypervolume_basics() {
        assert_eq!(hypervolume_2d(&[[0.0, 0.0]], IH_REFERENCE), 1.44);
        assert_eq!(hypervolume_2d(&[IH_REFERENCE], IH_REFERENCE), 0.0);
        assert_eq!(hypervolume_2d(&[], IH_REFERENCE), 0.0);
        // beyond the reference point in one objective
        assert_eq!(hypervolume_2d(&[[0.0, 1.5]], IH_REFERENCE), 0.0);
        // dominated points add nothing
        let a = hypervolume_2d(&[[0.2, 0.2]], [1.0, 1.0]);
        let b = hypervolume_2d(&[[0.2, 0.2], [0.5, 0.5], [0.2, 0.2]], [1.0, 1.0]);
        assert_eq!(a, b);
    }

    #[test]
    fn ih_basics() {
        let reference = vec![[0.0, 1.0], [1.0, 0.0]];
        assert_eq!(ih(&reference, &reference, IH_REFERENCE).unwrap(), 0.0);
        // dropping (1, 0) loses its exclusive box (1.2 - 1) * (1.0 - 0) = 0.2
        let shortfall = ih(&reference[..1], &reference, IH_REFERENCE).unwrap();
        assert!((shortfall - 0.2).abs() < 1e-12);
        assert!(ih(&[], &reference, IH_REFERENCE).is_err());
        // better than the reference gives a negative value
        assert!(ih(&[[-0.1, -0.1]], &reference, IH_REFERENCE).unwrap() < 0.0);
    }

    #[test]
    fn bounds_map_reference_into_unit_square() {
        let (front, _) = ReferenceFront::from_points(vec![
            FrontPoint::new(0.002, 0.0001),
            FrontPoint::new(0.004, 0.0003),
            FrontPoint::new(0.008, 0.0009),
        ])
        .unwrap();
        let b = Bounds::from_reference(&front);
        let pts = b.normalize_all(&front.minimization_points());
        assert_eq!(pts[0], [0.0, 1.0]);
        assert_eq!(pts[2], [1.0, 0.0]);
        let outside = b.normalize(&[0.002, -0.01]);
        assert!(outside[0] > 1.0 && outside[1] < 0.0);
        let (ig, ihv) = indicators(&front.minimization_points(), &front).unwrap();
        assert_eq!((ig, ihv), (0.0, 0.0));
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0, 2.0]), vec![4.0, 1.0, 2.5, 2.5]);
    }

    #[test]
    fn rank_sum_identical_samples_equal() {
        let a = [0.1, 0.2, 0.3, 0.4, 0.5];
        let r = rank_sum_test(&a, &a, 0.05).unwrap();
        assert_eq!(r.outcome, Comparison::Equal);
        let tied = [1.0; 6];
        assert_eq!(rank_sum_test(&tied, &tied, 0.05).unwrap().outcome, Comparison::Equal);
        assert_eq!(rank_sum_test(&[1.0], &tied, 0.05), Err(MetricError::SampleSize));
    }

    #[test]
    fn rank_sum_separated_samples() {
        let a: Vec<f64> = (0..20).map(|i| 0.001 + 1e-5 * i as f64).collect();
        let b: Vec<f64> = (0..20).map(|i| 0.1 + 1e-3 * i as f64).collect();
        let r = rank_sum_test(&a, &b, 0.05).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.outcome, Comparison::Better);
        assert_eq!(rank_sum_test(&b, &a, 0.05).unwrap().outcome, Comparison::Worse);
    }

    #[test]
    fn rank_sum_matches_reference_p_value() {
        // x = 1..5, y = 6..10: U = 0, z = (12.5 - 0.5)/sqrt(22.9167) = 2.5067,
        // two-sided p = 0.012186 (normal approximation with continuity).
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [6.0, 7.0, 8.0, 9.0, 10.0];
        let r = rank_sum_test(&x, &y, 0.05).unwrap();
        assert!((r.p_value - 0.012186).abs() < 1e-5, "{}", r.p_value);
    }

    #[test]
    fn mean_rank_conventions() {
        let results = vec![vec![0.1, 0.2, 0.3], vec![0.5, 0.6, 0.7]];
        assert_eq!(mean_rank(&results).unwrap(), vec![1.0, 2.0]);
        let same = vec![vec![0.1, 0.2], vec![0.1, 0.2]];
        assert_eq!(mean_rank(&same).unwrap(), vec![1.5, 1.5]);
        assert_eq!(mean_rank(&[vec![1.0], vec![]]), Err(MetricError::Ragged));
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(std_dev(&[1.0, 2.0, 3.0]), 1.0);
    }
}
