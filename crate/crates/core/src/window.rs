//! Exact circular window counting over a sorted slice.
//!
//! A window is the set of indices whose value lies within circle distance
//! `r` of a center. The membership predicate everywhere in this crate is
//! the literal `torus_dist(v, center) <= r`, including its floating-point
//! rounding. Binary search runs on raw values, which can disagree with the
//! rounded distance within a few ulps of a window edge, so the searches
//! only bracket the window: elements inside the bracket by a safety margin
//! are counted outright, elements in the margin bands are re-tested with
//! the exact predicate. Counts therefore match a linear scan exactly on
//! every input, degenerate ones included.

use crate::torus::torus_dist;
use std::ops::Range;

/// Wider than any rounding discrepancy between value-space edges and the
/// rounded circle distance (a few ulps at magnitude one), narrower than
/// anything that would make the margin scans expensive.
const EDGE_MARGIN: f64 = 1e-13;

/// Below this size a linear scan beats the bookkeeping.
const SCAN_CUTOFF: usize = 32;

/// Number of sorted values within circle distance `r` of `center`.
///
/// `values` must be sorted ascending and reduced to [0, 1); `r` must be
/// non-negative. Radii of 1/2 or more cover the circle.
pub(crate) fn count_in_window(values: &[f64], center: f64, r: f64) -> usize {
    debug_assert!(r >= 0.0);
    let n = values.len();
    if n == 0 {
        return 0;
    }
    if r >= 0.5 {
        return n;
    }
    if n <= SCAN_CUTOFF || 2.0 * r >= 1.0 - 64.0 * EDGE_MARGIN {
        return values
            .iter()
            .filter(|&&v| torus_dist(v, center) <= r)
            .count();
    }
    let (first, second) = value_intervals(center, r);
    let mut total = count_interval(values, first.0, first.1, center, r);
    if let Some((a, b)) = second {
        total += count_interval(values, a, b, center, r);
    }
    total
}

/// Up to two ranges of sorted indices that jointly contain every window
/// member (and possibly a few near-edge outsiders). Callers must re-test
/// each element; the ranges are disjoint.
pub(crate) fn window_superset(values: &[f64], center: f64, r: f64) -> [Range<usize>; 2] {
    let n = values.len();
    if n == 0 {
        return [0..0, 0..0];
    }
    if n <= SCAN_CUTOFF || r >= 0.5 || 2.0 * r >= 1.0 - 64.0 * EDGE_MARGIN {
        return [0..n, 0..0];
    }
    let (first, second) = value_intervals(center, r);
    let a = superset_range(values, first.0, first.1);
    let b = match second {
        Some((lo, hi)) => superset_range(values, lo, hi),
        None => 0..0,
    };
    [a, b]
}

/// The window as one or two value intervals on [0, 1), lower one first.
/// Only valid for 2r comfortably below 1, which the callers guarantee.
fn value_intervals(center: f64, r: f64) -> ((f64, f64), Option<(f64, f64)>) {
    let lo = center - r;
    let hi = center + r;
    if lo < 0.0 {
        ((0.0, hi), Some((lo + 1.0, 1.0)))
    } else if hi >= 1.0 {
        ((0.0, hi - 1.0), Some((lo, 1.0)))
    } else {
        ((lo, hi), None)
    }
}

fn first_at_least(values: &[f64], t: f64) -> usize {
    values.partition_point(|&v| v < t)
}

fn first_greater(values: &[f64], t: f64) -> usize {
    values.partition_point(|&v| v <= t)
}

fn superset_range(values: &[f64], a: f64, b: f64) -> Range<usize> {
    first_at_least(values, a - EDGE_MARGIN)..first_greater(values, b + EDGE_MARGIN)
}

fn count_interval(values: &[f64], a: f64, b: f64, center: f64, r: f64) -> usize {
    let m = EDGE_MARGIN;
    let i0 = first_at_least(values, a - m);
    let i3 = first_greater(values, b + m);
    if i0 >= i3 {
        return 0;
    }
    let i1 = first_at_least(values, a + m);
    let i2 = first_greater(values, b - m);
    if a + m <= b - m && i1 <= i2 {
        let mut c = i2 - i1;
        for &v in &values[i0..i1] {
            if torus_dist(v, center) <= r {
                c += 1;
            }
        }
        for &v in &values[i2..i3] {
            if torus_dist(v, center) <= r {
                c += 1;
            }
        }
        c
    } else {
        values[i0..i3]
            .iter()
            .filter(|&&v| torus_dist(v, center) <= r)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(values: &[f64], center: f64, r: f64) -> usize {
        values
            .iter()
            .filter(|&&v| torus_dist(v, center) <= r)
            .count()
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_unstable_by(f64::total_cmp);
        v
    }

    #[test]
    fn matches_scan_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..400);
            let values = sorted((0..n).map(|_| rng.gen::<f64>()).collect());
            let center: f64 = rng.gen();
            let r: f64 = rng.gen::<f64>() * 0.7;
            assert_eq!(
                count_in_window(&values, center, r),
                naive(&values, center, r)
            );
        }
    }

    #[test]
    fn matches_scan_on_degenerate_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for case in 0..200 {
            let n = 40 + case;
            let mut values = Vec::with_capacity(n);
            let base: f64 = rng.gen();
            for _ in 0..n {
                // Heavy duplicates and ulp-scale clusters around a few sites.
                let site = base + 0.31 * rng.gen_range(0..3) as f64;
                let jitter = if rng.gen_bool(0.5) {
                    0.0
                } else {
                    f64::EPSILON * rng.gen_range(-3i32..=3) as f64
                };
                values.push(crate::torus::frac(site + jitter));
            }
            let values = sorted(values);
            for &r in &[0.0, 1e-17, 1e-13, 0.155, 0.31, 0.49999999, 0.5, 0.62] {
                let center = crate::torus::frac(base + 0.31);
                assert_eq!(
                    count_in_window(&values, center, r),
                    naive(&values, center, r),
                    "n={n} r={r}"
                );
            }
        }
    }

    #[test]
    fn matches_scan_with_boundary_aligned_radii() {
        // Points on an exact lattice and radii equal to lattice distances:
        // ties on the closed boundary must count.
        let values: Vec<f64> = (0..128).map(|i| i as f64 / 128.0).collect();
        for &center in &[0.0, 0.5, 0.25, 63.0 / 128.0] {
            for k in 0..64 {
                let r = k as f64 / 128.0;
                assert_eq!(
                    count_in_window(&values, center, r),
                    naive(&values, center, r),
                    "center={center} r={r}"
                );
            }
        }
    }

    #[test]
    fn superset_covers_every_member() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.gen_range(1..300);
            let values = sorted((0..n).map(|_| rng.gen::<f64>()).collect());
            let center: f64 = rng.gen();
            let r: f64 = rng.gen::<f64>() * 0.6;
            let [a, b] = window_superset(&values, center, r);
            assert!(a.end <= b.start || b.is_empty(), "ranges overlap");
            let mut inside = vec![false; n];
            for i in a.chain(b) {
                inside[i] = true;
            }
            for (i, &v) in values.iter().enumerate() {
                if torus_dist(v, center) <= r {
                    assert!(inside[i], "member {i} escaped the superset");
                }
            }
        }
    }
}
