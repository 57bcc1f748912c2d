//! Brute-force reference implementations used only by tests. Nothing here
//! calls into the library code it checks.
#![allow(dead_code)]

use rand::Rng;

pub type P = [f64; 2];

pub fn dominates(a: &P, b: &P) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Peel fronts by repeated O(n^2) scans.
pub fn fronts(points: &[P]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut out = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        remaining.retain(|i| !front.contains(i));
        out.push(front);
    }
    out
}

/// Textbook crowding distance.
pub fn crowding(front: &[P]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut d = vec![0.0; n];
    for k in 0..2 {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| front[a][k].partial_cmp(&front[b][k]).unwrap().then(a.cmp(&b)));
        let (lo, hi) = (front[idx[0]][k], front[idx[n - 1]][k]);
        d[idx[0]] = f64::INFINITY;
        d[idx[n - 1]] = f64::INFINITY;
        for w in 1..n - 1 {
            if hi > lo && d[idx[w]].is_finite() {
                d[idx[w]] += (front[idx[w + 1]][k] - front[idx[w - 1]][k]) / (hi - lo);
            }
        }
    }
    d
}

fn box_area(p: &P, r: &P) -> f64 {
    (r[0] - p[0]).max(0.0) * (r[1] - p[1]).max(0.0)
}

fn meet(a: &P, b: &P) -> P {
    [a[0].max(b[0]), a[1].max(b[1])]
}

/// Inclusion-exclusion over all subsets; exact but exponential.
pub fn hv_inclusion_exclusion(points: &[P], r: &P) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut corner = [f64::NEG_INFINITY; 2];
        let mut count = 0;
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                corner = meet(&corner, p);
                count += 1;
            }
        }
        let a = box_area(&corner, r);
        total += if count % 2 == 1 { a } else { -a };
    }
    total
}

/// Monte-Carlo estimate over the box `[lo, r]` with jittered stratified
/// samples on a `side x side` grid. Returns (estimate, iid standard error).
pub fn hv_monte_carlo<R: Rng>(points: &[P], r: &P, lo: &P, side: usize, rng: &mut R) -> (f64, f64) {
    let w = r[0] - lo[0];
    let h = r[1] - lo[1];
    let mut hits = 0usize;
    for a in 0..side {
        for b in 0..side {
            let x = lo[0] + w * (a as f64 + rng.gen::<f64>()) / side as f64;
            let y = lo[1] + h * (b as f64 + rng.gen::<f64>()) / side as f64;
            if points.iter().any(|p| p[0] <= x && p[1] <= y) {
                hits += 1;
            }
        }
    }
    let n = (side * side) as f64;
    let frac = hits as f64 / n;
    let area = w * h;
    (area * frac, area * (frac * (1.0 - frac) / n).sqrt())
}

pub fn igd(obtained: &[P], reference: &[P]) -> f64 {
    let mut total = 0.0;
    for q in reference {
        let mut best = f64::INFINITY;
        for s in obtained {
            let d = ((q[0] - s[0]).powi(2) + (q[1] - s[1]).powi(2)).sqrt();
            if d < best {
                best = d;
            }
        }
        total += best;
    }
    total / reference.len() as f64
}

/// Leave-one-out hypervolume loss of each point against `r`.
pub fn hv_loss<F: Fn(&[P], &P) -> f64>(points: &[P], r: &P, hv: F) -> Vec<f64> {
    let full = hv(points, r);
    (0..points.len())
        .map(|i| {
            let rest: Vec<P> = points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| *p)
                .collect();
            full - hv(&rest, r)
        })
        .collect()
}

/// Area of the union of boxes by coordinate compression; exact.
pub fn hv_grid(points: &[P], r: &P) -> f64 {
    let pts: Vec<P> = points.iter().copied().filter(|p| p[0] < r[0] && p[1] < r[1]).collect();
    let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    xs.push(r[0]);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let mut ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    ys.push(r[1]);
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let mut area = 0.0;
    for a in 0..xs.len().saturating_sub(1) {
        for b in 0..ys.len().saturating_sub(1) {
            let (x, y) = (xs[a], ys[b]);
            if pts.iter().any(|p| p[0] <= x && p[1] <= y) {
                area += (xs[a + 1] - x) * (ys[b + 1] - y);
            }
        }
    }
    area
}

/// Which point SMS-EMOA should remove: worst front by peeling, normalized
/// to its own range, reference (2, 2), smallest leave-one-out loss.
pub fn sms_removal(points: &[P]) -> (usize, Vec<usize>, Vec<f64>) {
    let fs = fronts(points);
    let last = fs.last().unwrap().clone();
    if last.len() == 1 {
        return (last[0], last, vec![0.0]);
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for &i in &last {
        for k in 0..2 {
            lo[k] = lo[k].min(points[i][k]);
            hi[k] = hi[k].max(points[i][k]);
        }
    }
    let norm: Vec<P> = last
        .iter()
        .map(|&i| {
            let mut q = [0.0; 2];
            for k in 0..2 {
                q[k] = if hi[k] > lo[k] { (points[i][k] - lo[k]) / (hi[k] - lo[k]) } else { 0.0 };
            }
            q
        })
        .collect();
    let loss = hv_loss(&norm, &[2.0, 2.0], hv_grid);
    let mut best = 0;
    for w in 1..loss.len() {
        if loss[w] < loss[best] {
            best = w;
        }
    }
    (last[best], last, loss)
}

/// CDF of the polynomial perturbation delta on [-1, 1].
pub fn polynomial_delta_cdf(d: f64, eta: f64) -> f64 {
    if d < 0.0 {
        0.5 * (1.0 + d).max(0.0).powf(eta + 1.0)
    } else {
        1.0 - 0.5 * (1.0 - d).max(0.0).powf(eta + 1.0)
    }
}
