//! Exact star discrepancy of a finite point set.
//!
//! The star discrepancy is the supremum over prefixes `[0, b)` of the
//! gap between the empirical measure and `b`. Over sorted values it has
//! a closed form: the supremum is approached at the sample points, where
//! the empirical measure jumps, so
//! `D* = max_i max(|x_(i) - (i-1)/N|, |x_(i) - i/N|)`.

use crate::error::{Error, Result};
use crate::sequences::PointSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscrepancyResult {
    /// The star discrepancy, always in `[1/(2N), 1]`.
    pub d_star: f64,
    /// A prefix endpoint approaching the supremum (the sorted value at
    /// the maximising index); diagnostic only.
    pub argmax_prefix: f64,
    pub n: usize,
}

/// Exact star discrepancy over half-open prefixes `[0, b)`.
pub fn star_discrepancy(points: &PointSet) -> Result<DiscrepancyResult> {
    let n = points.len();
    if n == 0 {
        return Err(Error::TooFewPoints {
            what: "star_discrepancy",
            needed: 1,
            got: 0,
        });
    }
    let sorted = &points.sorted().values;
    let nf = n as f64;
    let mut best = f64::NEG_INFINITY;
    let mut arg = sorted[0];
    for (i, &x) in sorted.iter().enumerate() {
        let below = (x - i as f64 / nf).abs();
        let above = (x - (i + 1) as f64 / nf).abs();
        let local = below.max(above);
        if local > best {
            best = local;
            arg = x;
        }
    }
    Ok(DiscrepancyResult {
        d_star: best,
        argmax_prefix: arg,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{generate, SequenceSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(v: &[f64]) -> PointSet {
        PointSet::new(v.to_vec()).unwrap()
    }

    /// Brute-force supremum of |#{x < b}/N - b| over a dense candidate
    /// set: every sample value and lattice value, each nudged both ways.
    fn brute_force(points: &PointSet) -> f64 {
        let n = points.len();
        let nf = n as f64;
        let vals = points.values();
        let mut candidates: Vec<f64> = vec![1.0];
        for i in 0..=n {
            candidates.push(i as f64 / nf);
        }
        for &v in vals {
            candidates.push(v);
        }
        let nudged: Vec<f64> = candidates
            .iter()
            .flat_map(|&b| [b - 1e-13, b, b + 1e-13])
            .filter(|&b| (0.0..=1.0).contains(&b))
            .collect();
        let mut best: f64 = 0.0;
        for b in nudged {
            let count = vals.iter().filter(|&&v| v < b).count();
            best = best.max((count as f64 / nf - b).abs());
        }
        best
    }

    #[test]
    fn small_examples() {
        let r = star_discrepancy(&pts(&[0.5])).unwrap();
        assert_eq!(r.d_star, 0.5);
        assert_eq!(r.argmax_prefix, 0.5);

        let r = star_discrepancy(&pts(&[0.25, 0.75])).unwrap();
        assert_eq!(r.d_star, 0.25);

        // A fully clustered set leaves [0, b) empty of mass near b -> 1.
        let r = star_discrepancy(&pts(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(r.d_star, 1.0);

        assert!(star_discrepancy(&PointSet::new(vec![]).unwrap()).is_err());
    }

    #[test]
    fn midpoint_lattice_attains_the_lower_bound() {
        for n in [4usize, 8, 16, 100] {
            let vals: Vec<f64> = (1..=n)
                .map(|i| (2 * i - 1) as f64 / (2 * n) as f64)
                .collect();
            let r = star_discrepancy(&pts(&vals)).unwrap();
            assert!(
                (r.d_star - 1.0 / (2.0 * n as f64)).abs() < 1e-15,
                "n={n} d={}",
                r.d_star
            );
        }
    }

    #[test]
    fn bounds_hold_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xD15C);
        for _ in 0..100 {
            let n = rng.gen_range(1..200);
            let p = pts(&(0..n).map(|_| rng.gen::<f64>()).collect::<Vec<_>>());
            let r = star_discrepancy(&p).unwrap();
            assert!(r.d_star >= 1.0 / (2.0 * n as f64) - 1e-15);
            assert!(r.d_star <= 1.0);
        }
    }

    #[test]
    fn matches_brute_force_supremum() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xB4F);
        for _ in 0..60 {
            let n = rng.gen_range(1..=50);
            let p = pts(&(0..n).map(|_| rng.gen::<f64>()).collect::<Vec<_>>());
            let r = star_discrepancy(&p).unwrap();
            let bf = brute_force(&p);
            assert!(
                (r.d_star - bf).abs() <= 1e-12,
                "formula {} vs brute force {bf}",
                r.d_star
            );
        }
    }

    #[test]
    fn sorted_input_is_irrelevant() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x50F7);
        let mut vals: Vec<f64> = (0..77).map(|_| rng.gen()).collect();
        let direct = star_discrepancy(&pts(&vals)).unwrap();
        vals.sort_unstable_by(f64::total_cmp);
        vals.reverse();
        let reversed = star_discrepancy(&pts(&vals)).unwrap();
        assert_eq!(direct.d_star, reversed.d_star);
    }

    #[test]
    fn kronecker_discrepancy_grows_like_log_over_n() {
        // For a badly approximable rotation number the scaled star
        // discrepancy N D* / log N stays bounded; the constant here is
        // deliberately generous.
        let spec = SequenceSpec::Kronecker {
            alpha: std::f64::consts::SQRT_2,
        };
        let mut n = 100;
        while n <= 100_000 {
            let p = generate(&spec, n).unwrap();
            let r = star_discrepancy(&p).unwrap();
            let scaled = r.d_star * n as f64 / (n as f64).ln();
            assert!(scaled <= 5.0, "N={n}: N D*/log N = {scaled}");
            n *= 10;
        }
    }
}
