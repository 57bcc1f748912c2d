//! Pareto sorting, crowding distance and NSGA-II truncation for
//! bi-objective minimization points.

use alloc::vec;
use alloc::vec::Vec;

use crate::Point;

/// `a` is no worse in both objectives and strictly better in one.
#[inline]
pub fn dominates(a: &Point, b: &Point) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Splits `points` into fronts of indices; front 0 is non-dominated.
///
/// Sweeps the points in lexicographic order, so every point is compared only
/// with the last member of each existing front: that member has the lowest
/// second objective in its front among points seen so far.
pub fn nondominated_sort(points: &[Point]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
            .then(a.cmp(&b))
    });
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    for i in order {
        // Fronts are ordered by domination, so the first front whose last
        // member does not dominate `i` is where it belongs.
        let slot = fronts.partition_point(|f| dominates(&points[*f.last().unwrap()], &points[i]));
        if slot == fronts.len() {
            fronts.push(vec![i]);
        } else {
            fronts[slot].push(i);
        }
    }
    for f in &mut fronts {
        f.sort_unstable();
    }
    fronts
}

/// Crowding distance of every point of one front, in input order.
pub fn crowding_distance(front: &[Point]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for k in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]).then(a.cmp(&b)));
        let lo = front[order[0]][k];
        let hi = front[order[n - 1]][k];
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let i = order[w];
            if distance[i].is_finite() {
                distance[i] += (front[order[w + 1]][k] - front[order[w - 1]][k]) / range;
            }
        }
    }
    distance
}

/// Picks `keep` indices by front order; the front that does not fit is cut
/// by descending crowding distance, lower index first on ties.
pub fn nsga2_select(points: &[Point], keep: usize) -> Vec<usize> {
    let keep = keep.min(points.len());
    let mut chosen = Vec::with_capacity(keep);
    for front in nondominated_sort(points) {
        let room = keep - chosen.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            chosen.extend_from_slice(&front);
            continue;
        }
        let pts: Vec<Point> = front.iter().map(|&i| points[i]).collect();
        let cd = crowding_distance(&pts);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| cd[b].total_cmp(&cd[a]).then(front[a].cmp(&front[b])));
        chosen.extend(order.into_iter().take(room).map(|w| front[w]));
        break;
    }
    chosen
}
