//! Circular gap structure of point sets.
//!
//! Sorting the points and walking around the circle yields N gaps (the
//! last one wraps from the largest value back to the smallest plus one).
//! Floating-point gaps that should coincide differ by rounding, so
//! distinctness is decided by single-linkage clustering at an absolute
//! tolerance. A prefix scanner recomputes nothing: it maintains the gap
//! multiset incrementally while points arrive in generation order, using
//! the same two gap formulas as the full profile so both routes agree
//! exactly.

use crate::error::{Error, Result};
use crate::exec;
use crate::sequences::{PointSet, SequenceSpec};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Default clustering tolerance for gap distinctness.
pub const DEFAULT_GAP_TOL: f64 = 1e-9;
/// Default threshold on `N d` above which a trajectory counts as growing.
pub const DEFAULT_GROWTH_THRESHOLD: f64 = 50.0;
/// Default bound on `N d` under which a trajectory counts as bounded.
pub const DEFAULT_BOUND_THRESHOLD: f64 = 50.0;

/// Gap between two circularly consecutive sorted values `a <= b`.
#[inline]
fn inner_gap(a: f64, b: f64) -> f64 {
    b - a
}

/// Wrap-around gap from the largest sorted value back to the smallest.
#[inline]
fn wrap_gap(first: f64, last: f64) -> f64 {
    first + 1.0 - last
}

/// Distinct gap values with multiplicities, after clustering.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapProfile {
    /// Ascending distinct gap values (cluster means) with multiplicities.
    pub gaps: Vec<(f64, usize)>,
    pub tolerance: f64,
    pub n: usize,
}

/// Single-linkage clustering of an ascending gap list: a new cluster
/// starts whenever the step to the previous value exceeds `tol`.
/// Returns (cluster mean, cluster size) per cluster.
fn cluster_sorted(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tol {
            let chunk = &sorted[start..i];
            let mean = chunk.iter().sum::<f64>() / chunk.len() as f64;
            out.push((mean, chunk.len()));
            start = i;
        }
    }
    out
}

/// The N circular gaps of the sorted point set, clustered at `tol`.
pub fn gap_profile(points: &PointSet, tol: f64) -> Result<GapProfile> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints {
            what: "gap_profile",
            needed: 2,
            got: n,
        });
    }
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidQuery(format!(
            "gap tolerance must be finite and nonnegative, got {tol}"
        )));
    }
    let sorted = &points.sorted().values;
    let mut gaps: Vec<f64> = sorted.windows(2).map(|w| inner_gap(w[0], w[1])).collect();
    gaps.push(wrap_gap(sorted[0], sorted[n - 1]));
    gaps.sort_unstable_by(f64::total_cmp);
    Ok(GapProfile {
        gaps: cluster_sorted(&gaps, tol),
        tolerance: tol,
        n,
    })
}

/// Number of distinct gap values at tolerance `tol`.
pub fn distinct_gap_count(points: &PointSet, tol: f64) -> Result<usize> {
    Ok(gap_profile(points, tol)?.gaps.len())
}

/// One prefix of the incremental scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrefixGapRow {
    pub n: usize,
    /// Distinct gap count at the scan tolerance.
    pub distinct: usize,
    /// Sum of all N circular gaps; always 1 up to rounding.
    pub gap_sum: f64,
}

/// Gap statistics of every prefix (in generation order) of the point
/// set, one row per prefix length from 2 to N.
///
/// Each insertion splits one circular gap into two, so the whole scan
/// costs one gap update per point plus a clustering pass over the
/// distinct values per row. Gap values use the same formulas as
/// [`gap_profile`], hence match it exactly at every prefix.
pub fn prefix_gap_scan(points: &PointSet, tol: f64) -> Result<Vec<PrefixGapRow>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints {
            what: "prefix_gap_scan",
            needed: 2,
            got: n,
        });
    }
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidQuery(format!(
            "gap tolerance must be finite and nonnegative, got {tol}"
        )));
    }
    let values = points.values();
    let mut sorted: Vec<f64> = Vec::with_capacity(n);
    // Gap multiset keyed by bit pattern (order-preserving for the
    // nonnegative gap values).
    let mut multiset: BTreeMap<u64, usize> = BTreeMap::new();
    let mut rows = Vec::with_capacity(n - 1);

    sorted.push(values[0]);
    // A single point has one circular gap: the whole circle back to
    // itself, written with the shared wrap formula for consistency.
    add_gap(&mut multiset, wrap_gap(values[0], values[0]));

    for (len, &v) in values.iter().enumerate().skip(1) {
        let pos = sorted.partition_point(|&x| x < v);
        let (removed, added) = if pos == 0 {
            (
                wrap_gap(sorted[0], sorted[len - 1]),
                [inner_gap(v, sorted[0]), wrap_gap(v, sorted[len - 1])],
            )
        } else if pos == len {
            (
                wrap_gap(sorted[0], sorted[len - 1]),
                [inner_gap(sorted[len - 1], v), wrap_gap(sorted[0], v)],
            )
        } else {
            (
                inner_gap(sorted[pos - 1], sorted[pos]),
                [inner_gap(sorted[pos - 1], v), inner_gap(v, sorted[pos])],
            )
        };
        remove_gap(&mut multiset, removed);
        add_gap(&mut multiset, added[0]);
        add_gap(&mut multiset, added[1]);
        sorted.insert(pos, v);

        let distinct_values: Vec<f64> = multiset.keys().map(|&bits| f64::from_bits(bits)).collect();
        let distinct = cluster_sorted(&distinct_values, tol).len();
        let gap_sum: f64 = multiset
            .iter()
            .map(|(&bits, &count)| f64::from_bits(bits) * count as f64)
            .sum();
        rows.push(PrefixGapRow {
            n: len + 1,
            distinct,
            gap_sum,
        });
    }
    Ok(rows)
}

fn add_gap(multiset: &mut BTreeMap<u64, usize>, gap: f64) {
    *multiset.entry(gap.to_bits()).or_insert(0) += 1;
}

fn remove_gap(multiset: &mut BTreeMap<u64, usize>, gap: f64) {
    let bits = gap.to_bits();
    let count = multiset
        .get_mut(&bits)
        .expect("gap bookkeeping out of sync");
    *count -= 1;
    if *count == 0 {
        multiset.remove(&bits);
    }
}

/// Heuristic class of one gap rank along a grid of prefix lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapClass {
    /// The gap vanishes (within tolerance) at every grid point.
    Zero,
    /// `N d` clears the growth threshold at the end and does not shrink
    /// over the last half of the grid.
    Large,
    /// `N d` stays positive and below the bound threshold throughout.
    Medium,
    /// Anything else, including rank counts that change along the grid.
    Undetermined,
}

impl fmt::Display for GapClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GapClass::Zero => "zero",
            GapClass::Large => "large",
            GapClass::Medium => "medium",
            GapClass::Undetermined => "undetermined",
        };
        f.write_str(name)
    }
}

/// One grid observation of a gap rank.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapSample {
    pub n: usize,
    /// The rank-th smallest distinct gap value at this prefix length.
    pub gap: f64,
    /// `n * gap`, the natural scale for gaps of equidistributed sets.
    pub scaled: f64,
}

/// The trajectory of one gap rank along the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapTrajectory {
    /// 1-based rank among the distinct gaps, smallest first.
    pub rank: usize,
    pub samples: Vec<GapSample>,
    pub class: GapClass,
}

/// Tracks each distinct-gap rank of the sequence along a grid of prefix
/// lengths and classifies its scaled size `N d`.
///
/// This is a finite-grid diagnostic with explicit thresholds, not a
/// decision procedure for the limiting behaviour. Ranks are matched by
/// order statistics; if the distinct-gap count changes along the grid,
/// every trajectory is reported as [`GapClass::Undetermined`] (only the
/// ranks present at every grid point are emitted).
pub fn classify_gap_trajectories(
    spec: &SequenceSpec,
    grid: &[usize],
    tol: f64,
    growth_threshold: f64,
    bound_threshold: f64,
) -> Result<Vec<GapTrajectory>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidGrid(format!(
                "grid must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if grid[0] < 2 {
        return Err(Error::InvalidGrid(format!(
            "grid entries must be at least 2, got {}",
            grid[0]
        )));
    }
    for (name, v) in [("growth", growth_threshold), ("bound", bound_threshold)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::NotPositive {
                what: match name {
                    "growth" => "growth threshold",
                    _ => "bound threshold",
                },
                value: v,
            });
        }
    }
    let base = spec.points(*grid.last().unwrap())?;
    let profiles = exec::try_map_indexed(grid.len(), |i| gap_profile(&base.prefix(grid[i])?, tol))?;

    let ranks = profiles.iter().map(|p| p.gaps.len()).min().unwrap();
    let stable = profiles.iter().all(|p| p.gaps.len() == ranks);
    let half = grid.len() / 2;

    let mut out = Vec::with_capacity(ranks);
    for j in 0..ranks {
        let samples: Vec<GapSample> = grid
            .iter()
            .zip(&profiles)
            .map(|(&n, p)| {
                let gap = p.gaps[j].0;
                GapSample {
                    n,
                    gap,
                    scaled: n as f64 * gap,
                }
            })
            .collect();
        let class = if !stable {
            GapClass::Undetermined
        } else if samples.iter().all(|s| s.gap <= tol) {
            GapClass::Zero
        } else if samples.last().unwrap().scaled > growth_threshold
            && samples[half..]
                .windows(2)
                .all(|w| w[1].scaled >= w[0].scaled)
        {
            GapClass::Large
        } else if samples
            .iter()
            .all(|s| s.gap > tol && s.scaled <= bound_threshold)
        {
            GapClass::Medium
        } else {
            GapClass::Undetermined
        };
        out.push(GapTrajectory {
            rank: j + 1,
            samples,
            class,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::generate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    fn pts(v: &[f64]) -> PointSet {
        PointSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn lattice_profile_is_exact() {
        let p = pts(&[0.0, 0.25, 0.5, 0.75]);
        let profile = gap_profile(&p, 0.0).unwrap();
        assert_eq!(profile.gaps, vec![(0.25, 4)]);
        assert_eq!(distinct_gap_count(&p, 0.0).unwrap(), 1);
    }

    #[test]
    fn profile_validates_inputs() {
        assert!(gap_profile(&pts(&[0.3]), 0.0).is_err());
        assert!(gap_profile(&pts(&[0.3, 0.5]), -1.0).is_err());
        assert!(gap_profile(&pts(&[0.3, 0.5]), f64::NAN).is_err());
    }

    #[test]
    fn gaps_partition_the_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6A9);
        for _ in 0..50 {
            let n = rng.gen_range(2..400);
            let p = pts(&(0..n).map(|_| rng.gen::<f64>()).collect::<Vec<_>>());
            let profile = gap_profile(&p, 1e-9).unwrap();
            let total: f64 = profile.gaps.iter().map(|&(v, m)| v * m as f64).sum();
            let mults: usize = profile.gaps.iter().map(|&(_, m)| m).sum();
            assert!((total - 1.0).abs() <= 1e-9, "sum {total}");
            assert_eq!(mults, n);
            for w in profile.gaps.windows(2) {
                assert!(w[0].0 < w[1].0);
            }
        }
    }

    #[test]
    fn profile_ignores_input_order_and_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0D3);
        for _ in 0..20 {
            let n = rng.gen_range(3..100);
            let vals: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let base = gap_profile(&pts(&vals), 1e-9).unwrap();

            let mut shuffled = vals.clone();
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.gen_range(0..=i));
            }
            let permuted = gap_profile(&pts(&shuffled), 1e-9).unwrap();
            assert_eq!(base, permuted);

            let c = rng.gen::<f64>();
            let shifted: Vec<f64> = vals.iter().map(|&v| crate::frac(v + c)).collect();
            let shifted = gap_profile(&pts(&shifted), 1e-9).unwrap();
            assert_eq!(base.gaps.len(), shifted.gaps.len());
            for (a, b) in base.gaps.iter().zip(&shifted.gaps) {
                assert!((a.0 - b.0).abs() <= 1e-9);
                assert_eq!(a.1, b.1);
            }
        }
    }

    #[test]
    fn rotation_prefixes_have_at_most_three_gaps() {
        let spec = SequenceSpec::Kronecker {
            alpha: std::f64::consts::SQRT_2 / 5.0,
        };
        let p = generate(&spec, 30).unwrap();
        assert!(distinct_gap_count(&p, 1e-12).unwrap() <= 3);

        for alpha in [
            std::f64::consts::SQRT_2,
            (1.0 + 5.0f64.sqrt()) / 2.0,
            std::f64::consts::SQRT_2 / 5.0,
        ] {
            let spec = SequenceSpec::Kronecker { alpha };
            let rows = prefix_gap_scan(&generate(&spec, 2000).unwrap(), 1e-9).unwrap();
            for row in rows {
                assert!(
                    row.distinct <= 3,
                    "alpha={alpha} N={}: {}",
                    row.n,
                    row.distinct
                );
                assert!((row.gap_sum - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn digit_reversal_gap_counts() {
        // Base 2 with the zero term: at most two distinct gaps.
        let spec = SequenceSpec::VanDerCorput {
            base: 2,
            include_zero: true,
        };
        let rows = prefix_gap_scan(&generate(&spec, 1024).unwrap(), 1e-12).unwrap();
        for row in &rows {
            assert!(row.distinct <= 2, "N={}: {}", row.n, row.distinct);
            // Dyadic values make every gap exact: the sum is exactly 1.
            assert_eq!(row.gap_sum, 1.0, "N={}", row.n);
        }

        // Base 3 with zero: at most three.
        let spec = SequenceSpec::VanDerCorput {
            base: 3,
            include_zero: true,
        };
        let rows = prefix_gap_scan(&generate(&spec, 729).unwrap(), 1e-12).unwrap();
        for row in &rows {
            assert!(row.distinct <= 3, "N={}: {}", row.n, row.distinct);
            assert!((row.gap_sum - 1.0).abs() <= 1e-9);
        }

        // Base 2 without the zero term: at most four.
        let spec = SequenceSpec::VanDerCorput {
            base: 2,
            include_zero: false,
        };
        let rows = prefix_gap_scan(&generate(&spec, 1024).unwrap(), 1e-12).unwrap();
        for row in &rows {
            assert!(row.distinct <= 4, "N={}: {}", row.n, row.distinct);
        }
    }

    #[test]
    fn random_points_have_all_distinct_gaps() {
        for seed in [3u64, 17, 99] {
            let p = generate(&SequenceSpec::UniformRandom { seed }, 1000).unwrap();
            assert_eq!(distinct_gap_count(&p, 0.0).unwrap(), 1000);
        }
    }

    #[test]
    fn scan_matches_full_profile_at_every_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5CA7);
        let mut inputs: Vec<Vec<f64>> = (0..6)
            .map(|_| {
                let n = rng.gen_range(2..200);
                (0..n).map(|_| rng.gen::<f64>()).collect()
            })
            .collect();
        // Include ties and structured values.
        inputs.push(vec![0.2, 0.2, 0.9, 0.2, 0.5, 0.9]);
        inputs.push(
            generate(
                &SequenceSpec::Kronecker {
                    alpha: std::f64::consts::SQRT_2,
                },
                150,
            )
            .unwrap()
            .values()
            .to_vec(),
        );
        for vals in inputs {
            let p = pts(&vals);
            let rows = prefix_gap_scan(&p, 1e-9).unwrap();
            assert_eq!(rows.len(), vals.len() - 1);
            for row in rows {
                let profile = gap_profile(&p.prefix(row.n).unwrap(), 1e-9).unwrap();
                assert_eq!(row.distinct, profile.gaps.len(), "prefix {}", row.n);
                let profile_sum: f64 = profile.gaps.iter().map(|&(v, m)| v * m as f64).sum();
                assert!((row.gap_sum - profile_sum).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn scan_rejects_short_inputs() {
        assert!(prefix_gap_scan(&pts(&[0.4]), 1e-9).is_err());
    }

    #[test]
    fn refining_lattice_classifies_as_medium() {
        // Base-2 digit reversal including zero fills the dyadic lattice
        // at every power-of-two prefix: one gap with N d = 1 throughout.
        let spec = SequenceSpec::VanDerCorput {
            base: 2,
            include_zero: true,
        };
        let grid: Vec<usize> = (2..=10).map(|m| 1 << m).collect();
        let trajectories = classify_gap_trajectories(
            &spec,
            &grid,
            1e-12,
            DEFAULT_GROWTH_THRESHOLD,
            DEFAULT_BOUND_THRESHOLD,
        )
        .unwrap();
        assert_eq!(trajectories.len(), 1);
        assert_eq!(trajectories[0].class, GapClass::Medium);
        for s in &trajectories[0].samples {
            assert!((s.scaled - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_trajectories_stay_positive_and_bounded() {
        let spec = SequenceSpec::Kronecker {
            alpha: std::f64::consts::SQRT_2,
        };
        let grid = [10, 100, 1000, 10_000];
        let trajectories = classify_gap_trajectories(
            &spec,
            &grid,
            DEFAULT_GAP_TOL,
            DEFAULT_GROWTH_THRESHOLD,
            DEFAULT_BOUND_THRESHOLD,
        )
        .unwrap();
        assert!(!trajectories.is_empty());
        for t in &trajectories {
            assert!(
                t.class == GapClass::Medium || t.class == GapClass::Large,
                "rank {} classified {:?}",
                t.rank,
                t.class
            );
        }
    }

    #[test]
    fn duplicated_values_yield_a_zero_rank() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for v in [0.0, 0.0, 0.5, 0.5, 0.25, 0.25, 0.75, 0.75] {
            writeln!(file, "{v}").unwrap();
        }
        let spec = SequenceSpec::File {
            path: file.path().to_path_buf(),
        };
        let trajectories = classify_gap_trajectories(
            &spec,
            &[4, 8],
            DEFAULT_GAP_TOL,
            DEFAULT_GROWTH_THRESHOLD,
            DEFAULT_BOUND_THRESHOLD,
        )
        .unwrap();
        assert_eq!(trajectories[0].class, GapClass::Zero);
        assert_eq!(trajectories[1].class, GapClass::Medium);
    }

    #[test]
    fn classifier_validates_inputs() {
        let spec = SequenceSpec::Kronecker {
            alpha: std::f64::consts::SQRT_2,
        };
        let t = DEFAULT_GAP_TOL;
        assert!(classify_gap_trajectories(&spec, &[], t, 50.0, 50.0).is_err());
        assert!(classify_gap_trajectories(&spec, &[10, 10], t, 50.0, 50.0).is_err());
        assert!(classify_gap_trajectories(&spec, &[1, 10], t, 50.0, 50.0).is_err());
        assert!(classify_gap_trajectories(&spec, &[2, 10], t, -1.0, 50.0).is_err());
        assert!(classify_gap_trajectories(&spec, &[2, 10], t, 50.0, f64::NAN).is_err());
    }

    #[test]
    fn unstable_rank_counts_are_flagged() {
        // 0, 1/2, then thirds: the distinct count moves, so no class is
        // claimed for any rank.
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for v in [0.0, 0.5, 0.17, 0.84] {
            writeln!(file, "{v}").unwrap();
        }
        let spec = SequenceSpec::File {
            path: file.path().to_path_buf(),
        };
        let trajectories =
            classify_gap_trajectories(&spec, &[2, 4], DEFAULT_GAP_TOL, 50.0, 50.0).unwrap();
        assert!(trajectories
            .iter()
            .all(|t| t.class == GapClass::Undetermined));
    }
}
