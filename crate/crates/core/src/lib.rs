//! Correlation statistics for sequences on the unit torus.
//!
//! The library measures how k-tuples of a finite point set cluster at the
//! scale `1/N^beta`:
//!
//! * [`correlations`] — the box-counting statistic `R` (distinct ordered
//!   k-tuples whose pairwise offsets to an anchor fall in shrinking
//!   windows), a chain variant, and a weighted generalisation for
//!   piecewise-linear test functions.
//! * [`integral`] — the pair of localised counts `G` and `H`, the closed
//!   form of their inner product, the hinge rewriting used to cross-check
//!   it, and the combinatorial limit recursion `phi`.
//! * [`discrepancy`] — exact star discrepancy of a finite set.
//! * [`gaps`] — circular gap profiles, distinct-gap counts, and a
//!   heuristic trajectory classifier.
//! * [`sequences`] — Kronecker, van der Corput, seeded uniform and
//!   file-backed point sources with prefix-stable generation.
//! * [`verify`] — desk-scale experiments that compare the statistics
//!   against their predicted limits and emit reproducible reports.
//!
//! Counting kernels decompose over anchor indices. With the default
//! `parallel` feature the decomposition runs on rayon; without it the same
//! kernels run sequentially. Both modes combine per-anchor partials in a
//! fixed order, so results are byte-identical regardless of mode or thread
//! count.

pub mod correlations;
pub mod discrepancy;
pub mod error;
pub mod gaps;
pub mod integral;
pub mod sequences;
pub mod torus;
pub mod verify;

mod exec;
mod window;

pub use error::{Error, Result};
pub use torus::{arc_overlap, frac, signed_nearest, torus_dist, UnitPoint};

pub use sequences::{generate, load, parse_alpha, PointSet, SequenceSpec};

pub use correlations::{
    chain_count_naive, chain_count_naive_bounded, count_box_tuples, count_box_tuples_naive,
    f_count, f_count_excluding, functional_stat, normalization, r_stat, sweep, CorrelationQuery,
    CorrelationResult, PiecewiseLinear, Source, TestFunction,
};

pub use integral::{
    corner_alternating_sum, g_beta, gh_integral_closed, gh_integral_parts, gh_integral_quadrature,
    h_beta, hinge_sum, inclusion_exclusion_expand, phi, CornerSum, GHQuery,
};

pub use discrepancy::{star_discrepancy, DiscrepancyResult};

pub use gaps::{
    classify_gap_trajectories, distinct_gap_count, gap_profile, prefix_gap_scan, GapClass,
    GapProfile, GapSample, GapTrajectory, PrefixGapRow,
};

pub use verify::{
    check_box_convergence, check_gh_limit, check_non_convergence, default_tolerance,
    ExperimentReport, ExperimentRow, Verdict,
};
