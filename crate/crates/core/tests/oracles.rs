mod common;

use ccsport_core::metrics::{hypervolume_2d, igd, ih, IH_REFERENCE};
use ccsport_core::moea::{crowding_distance, nondominated_sort, nsga2_select, smsemoa_select};
use ccsport_core::Point;
use common::oracles;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(rng: &mut ChaCha8Rng, n: usize, grid: bool) -> Vec<Point> {
    (0..n)
        .map(|_| {
            if grid {
                // coarse grid forces ties and duplicates
                [rng.gen_range(0..6) as f64 / 5.0, rng.gen_range(0..6) as f64 / 5.0]
            } else {
                [rng.gen::<f64>(), rng.gen::<f64>()]
            }
        })
        .collect()
}

#[test]
fn nondominated_sort_matches_peeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..300 {
        let n = if case == 0 { 50 } else { rng.gen_range(1..40) };
        let pts = random_points(&mut rng, n, case % 2 == 1);
        let mut expected = oracles::fronts(&pts);
        for f in &mut expected {
            f.sort_unstable();
        }
        assert_eq!(nondominated_sort(&pts), expected, "case {case}");
    }
}

#[test]
fn crowding_matches_textbook() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let n = rng.gen_range(1..20);
        let pts = random_points(&mut rng, n, false);
        let got = crowding_distance(&pts);
        let want = oracles::crowding(&pts);
        for (g, w) in got.iter().zip(&want) {
            assert!(g == w || (g - w).abs() < 1e-12, "{g} vs {w}");
        }
    }
}

#[test]
fn nsga2_select_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let np = rng.gen_range(2..15);
        let pts = random_points(&mut rng, 2 * np, false);
        let mut expected = Vec::new();
        for front in oracles::fronts(&pts) {
            let room = np - expected.len();
            if front.len() <= room {
                expected.extend(front);
            } else {
                let fp: Vec<Point> = front.iter().map(|&i| pts[i]).collect();
                let cd = oracles::crowding(&fp);
                let mut order: Vec<usize> = (0..front.len()).collect();
                order.sort_by(|&a, &b| cd[b].partial_cmp(&cd[a]).unwrap().then(front[a].cmp(&front[b])));
                expected.extend(order.into_iter().take(room).map(|w| front[w]));
            }
            if expected.len() == np {
                break;
            }
        }
        let mut got = nsga2_select(&pts, np);
        got.sort_unstable();
        expected.sort_unstable();
        assert_eq!(got, expected);
    }
}

#[test]
fn hypervolume_matches_inclusion_exclusion_exactly_on_small_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let n = rng.gen_range(1..=3);
        // dyadic coordinates make every partial sum representable, so both
        // summation orders agree to the bit
        let pts: Vec<Point> = (0..n)
            .map(|_| [rng.gen_range(0..64) as f64 / 64.0, rng.gen_range(0..64) as f64 / 64.0])
            .collect();
        let r = [1.0, 1.0];
        assert_eq!(hypervolume_2d(&pts, r), oracles::hv_inclusion_exclusion(&pts, &r));
        // arbitrary floats: equal up to summation-order rounding
        let pts = random_points(&mut rng, n, false);
        let got = hypervolume_2d(&pts, r);
        let want = oracles::hv_inclusion_exclusion(&pts, &r);
        assert!((got - want).abs() <= 4.0 * f64::EPSILON * want.max(1e-300), "{got} vs {want}");
    }
}

#[test]
fn hypervolume_matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(1..30);
        let grid = rng.gen_bool(0.3);
        let pts = random_points(&mut rng, n, grid);
        let got = hypervolume_2d(&pts, IH_REFERENCE);
        let want = oracles::hv_grid(&pts, &IH_REFERENCE);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn hypervolume_ten_points_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pts = random_points(&mut rng, 10, false);
    let (estimate, se) = oracles::hv_monte_carlo(&pts, &IH_REFERENCE, &[0.0, 0.0], 1000, &mut rng);
    let exact = hypervolume_2d(&pts, IH_REFERENCE);
    assert!((estimate - exact).abs() <= 3.0 * se, "{estimate} vs {exact} (se {se})");
}

#[test]
fn igd_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let s = random_points(&mut rng, 30, false);
        let q = random_points(&mut rng, 50, false);
        assert!((igd(&s, &q).unwrap() - oracles::igd(&s, &q)).abs() < 1e-12);
    }
}

#[test]
fn igd_never_increases_when_points_are_added() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let q = random_points(&mut rng, 40, false);
    let mut s = random_points(&mut rng, 1, false);
    let mut last = igd(&s, &q).unwrap();
    for _ in 0..50 {
        s.push([rng.gen(), rng.gen()]);
        let now = igd(&s, &q).unwrap();
        assert!(now <= last);
        last = now;
    }
}

#[test]
fn ih_is_difference_of_areas() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let a = random_points(&mut rng, 12, false);
        let b = random_points(&mut rng, 20, false);
        let v = ih(&a, &b, IH_REFERENCE).unwrap();
        let want = oracles::hv_grid(&b, &IH_REFERENCE) - oracles::hv_grid(&a, &IH_REFERENCE);
        assert!((v - want).abs() < 1e-12);
        assert_eq!(ih(&a, &a, IH_REFERENCE).unwrap(), 0.0);
    }
}

#[test]
fn smsemoa_removal_matches_leave_one_out() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..300 {
        let n = if case < 50 { 12 } else { rng.gen_range(2..25) };
        let pts = random_points(&mut rng, n, false);
        let (want, _, _) = oracles::sms_removal(&pts);
        assert_eq!(smsemoa_select(&pts), Some(want), "case {case}");
    }
}
