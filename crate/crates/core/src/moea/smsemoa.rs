//! Steady-state hypervolume-based removal.

use alloc::vec::Vec;

use super::sorting::nondominated_sort;
use crate::Point;

/// Exclusive hypervolume contribution of each point of a mutually
/// non-dominated 2-D set with respect to `reference`, in input order.
pub fn hv_contributions(front: &[Point], reference: Point) -> Vec<f64> {
    let n = front.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        front[a][0]
            .total_cmp(&front[b][0])
            .then(front[b][1].total_cmp(&front[a][1]))
            .then(a.cmp(&b))
    });
    let mut contrib = alloc::vec![0.0; n];
    for w in 0..n {
        let p = front[order[w]];
        let right = if w + 1 < n { front[order[w + 1]][0] } else { reference[0] };
        let above = if w > 0 { front[order[w - 1]][1] } else { reference[1] };
        contrib[order[w]] = (right - p[0]).max(0.0) * (above - p[1]).max(0.0);
    }
    contrib
}

/// Index of the individual to drop from `points`: the member of the worst
/// front with the smallest exclusive hypervolume contribution (lower index
/// on ties). The worst front is normalized to `[0, 1]^2` and measured
/// against the reference point `(2, 2)`. `None` for an empty input.
pub fn smsemoa_select(points: &[Point]) -> Option<usize> {
    let fronts = nondominated_sort(points);
    let last = fronts.last()?;
    if last.len() == 1 {
        return Some(last[0]);
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for &i in last {
        for k in 0..2 {
            lo[k] = lo[k].min(points[i][k]);
            hi[k] = hi[k].max(points[i][k]);
        }
    }
    let normalized: Vec<Point> = last
        .iter()
        .map(|&i| {
            let mut q = [0.0; 2];
            for k in 0..2 {
                let range = hi[k] - lo[k];
                q[k] = if range > 0.0 { (points[i][k] - lo[k]) / range } else { 0.0 };
            }
            q
        })
        .collect();
    let contrib = hv_contributions(&normalized, [2.0, 2.0]);
    let mut best = 0;
    for (w, c) in contrib.iter().enumerate() {
        if *c < contrib[best] {
            best = w;
        }
    }
    Some(last[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_last_front_is_removed() {
        let pts = [[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]];
        assert_eq!(smsemoa_select(&pts), Some(2));
        assert_eq!(smsemoa_select(&[]), None);
    }

    #[test]
    fn middle_point_near_segment_goes() {
        let pts = [[0.0, 1.0], [0.5, 0.51], [1.0, 0.0]];
        assert_eq!(smsemoa_select(&pts), Some(1));
    }

    #[test]
    fn duplicates_contribute_nothing() {
        let c = hv_contributions(&[[0.5, 0.5], [0.5, 0.5], [0.0, 1.0]], [2.0, 2.0]);
        assert_eq!(c[0], 0.0);
        assert_eq!(c[1], 0.0);
        assert!(c[2] > 0.0);
    }
}
