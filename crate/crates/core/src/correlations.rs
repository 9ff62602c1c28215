//! Box-counting correlation statistics.
//!
//! The central count is over distinct ordered k-tuples of indices: the
//! last entry anchors the tuple, and each of the other k-1 slots must land
//! within its own window `s_l / N^beta` of the anchor (closed circle
//! distance, so a distance of exactly the radius qualifies and duplicate
//! values at distance zero always qualify). The normalised statistic
//! divides the raw count by `N^(k-(k-1)beta)`; for equidistributed-like
//! inputs it tends to the product of the window lengths `2 s_l`.
//!
//! Two routes compute every count. The naive route enumerates tuples
//! directly and exists as an oracle; the fast route counts window members
//! per anchor with binary searches and turns the nested window counts into
//! an injective-assignment product. Both use the identical membership
//! predicate, so they agree exactly, not just approximately.

use crate::error::{Error, Result};
use crate::exec;
use crate::sequences::{PointSet, SequenceSpec};
use crate::torus::{signed_nearest, torus_dist, UnitPoint};
use crate::window::{count_in_window, window_superset};
use std::fmt;

/// Naive enumerations refuse inputs larger than this unless a caller
/// raises the bound explicitly.
pub const DEFAULT_ORACLE_BOUND: usize = 200;

/// Per-anchor cap on injective-assignment enumeration work.
pub const DEFAULT_ASSIGNMENT_BOUND: u128 = 1_000_000;

/// Tuple order k, window exponent beta and window scales s.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationQuery {
    k: usize,
    beta: f64,
    s: Vec<f64>,
}

impl CorrelationQuery {
    /// Requires `k >= 2`, `0 < beta <= 1`, and `s` of length `k-1` with
    /// positive finite entries.
    pub fn new(k: usize, beta: f64, s: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidQuery(format!(
                "k must be at least 2, got {k}"
            )));
        }
        if !beta.is_finite() || beta <= 0.0 || beta > 1.0 {
            return Err(Error::InvalidQuery(format!(
                "beta must lie in (0, 1], got {beta}"
            )));
        }
        if s.len() != k - 1 {
            return Err(Error::InvalidQuery(format!(
                "expected {} window scales for k={k}, got {}",
                k - 1,
                s.len()
            )));
        }
        for &v in &s {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidQuery(format!(
                    "window scales must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { k, beta, s })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// Poissonian limit of the normalised statistic: the product of the
    /// window lengths `2 s_l`.
    pub fn target(&self) -> f64 {
        self.s.iter().map(|&v| 2.0 * v).product()
    }

    pub(crate) fn npow(&self, n: usize) -> f64 {
        (n as f64).powf(self.beta)
    }

    /// Window radii `s_l / N^beta` in slot order.
    pub(crate) fn window_radii(&self, n: usize) -> Vec<f64> {
        let p = self.npow(n);
        self.s.iter().map(|&v| v / p).collect()
    }
}

impl fmt::Display for CorrelationQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.s.iter().map(|v| v.to_string()).collect();
        write!(f, "k={} beta={} s={}", self.k, self.beta, s.join(","))
    }
}

/// `N^exponent`, evaluated as `exp(exponent ln N)` so that every module
/// normalises powers of N through one expression.
pub(crate) fn nexp(n: usize, exponent: f64) -> f64 {
    assert!(n >= 1);
    (exponent * (n as f64).ln()).exp()
}

/// `N^(k-(k-1)beta)`, evaluated as `exp((k-(k-1)beta) ln N)`.
pub fn normalization(n: usize, k: usize, beta: f64) -> f64 {
    assert!(k >= 2);
    let kf = k as f64;
    nexp(n, kf - (kf - 1.0) * beta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationResult {
    pub raw_count: u128,
    pub normalized: f64,
    pub target: f64,
    pub n: usize,
}

/// Fast count of distinct ordered k-tuples whose slot offsets to the
/// anchor stay within the query windows.
///
/// Per anchor, the windows are concentric, hence nested once the radii are
/// sorted: with ascending member counts `c_(1) <= ... <= c_(k-1)` (anchor
/// excluded) the number of injective slot assignments is
/// `prod_m max(0, c_(m) - (m-1))`.
pub fn count_box_tuples(points: &PointSet, q: &CorrelationQuery) -> Result<u128> {
    let n = points.len();
    if n < q.k {
        return Err(Error::TooFewPoints {
            what: "count_box_tuples",
            needed: q.k,
            got: n,
        });
    }
    let mut radii = q.window_radii(n);
    radii.sort_unstable_by(f64::total_cmp);
    let values = &points.sorted().values;
    let parts = exec::map_indexed(n, |anchor| {
        let x = values[anchor];
        let mut prod: u128 = 1;
        for (m, &r) in radii.iter().enumerate() {
            let c = count_in_window(values, x, r) - 1;
            if c <= m {
                return 0u128;
            }
            prod *= (c - m) as u128;
        }
        prod
    });
    Ok(parts.iter().sum())
}

/// Oracle: direct enumeration of all distinct ordered k-tuples. Costs
/// `O(N^k)`; intended for desk-scale cross-checks.
pub fn count_box_tuples_naive(points: &PointSet, q: &CorrelationQuery) -> Result<u128> {
    let n = points.len();
    if n < q.k {
        return Err(Error::TooFewPoints {
            what: "count_box_tuples_naive",
            needed: q.k,
            got: n,
        });
    }
    let radii = q.window_radii(n);
    let vals = points.values();
    let mut used = vec![false; n];
    let mut total = 0u128;
    for anchor in 0..n {
        used[anchor] = true;
        total += enumerate_box_slots(vals, &radii, vals[anchor], 0, &mut used);
        used[anchor] = false;
    }
    Ok(total)
}

fn enumerate_box_slots(
    vals: &[f64],
    radii: &[f64],
    x_anchor: f64,
    slot: usize,
    used: &mut [bool],
) -> u128 {
    if slot == radii.len() {
        return 1;
    }
    let mut total = 0u128;
    for i in 0..vals.len() {
        if used[i] || torus_dist(vals[i], x_anchor) > radii[slot] {
            continue;
        }
        used[i] = true;
        total += enumerate_box_slots(vals, radii, x_anchor, slot + 1, used);
        used[i] = false;
    }
    total
}

/// Normalised box statistic with its Poissonian target.
pub fn r_stat(points: &PointSet, q: &CorrelationQuery) -> Result<CorrelationResult> {
    let raw = count_box_tuples(points, q)?;
    let n = points.len();
    Ok(CorrelationResult {
        raw_count: raw,
        normalized: raw as f64 / normalization(n, q.k, q.beta),
        target: q.target(),
        n,
    })
}

/// Oracle count of distinct ordered k-tuples chained by consecutive
/// constraints: `dist(x_{i_l}, x_{i_{l+1}}) <= s_l / N^beta`. Refuses
/// N above [`DEFAULT_ORACLE_BOUND`].
pub fn chain_count_naive(points: &PointSet, q: &CorrelationQuery) -> Result<u128> {
    chain_count_naive_bounded(points, q, DEFAULT_ORACLE_BOUND)
}

/// [`chain_count_naive`] with an explicit size bound.
pub fn chain_count_naive_bounded(
    points: &PointSet,
    q: &CorrelationQuery,
    bound: usize,
) -> Result<u128> {
    let n = points.len();
    if n < q.k {
        return Err(Error::TooFewPoints {
            what: "chain_count_naive",
            needed: q.k,
            got: n,
        });
    }
    if n > bound {
        return Err(Error::SizeLimit {
            what: "chain_count_naive input",
            size: n as u128,
            bound: bound as u128,
        });
    }
    let radii = q.window_radii(n);
    let vals = points.values();
    let mut used = vec![false; n];
    let mut total = 0u128;
    for first in 0..n {
        used[first] = true;
        total += enumerate_chain(vals, &radii, first, 0, &mut used);
        used[first] = false;
    }
    Ok(total)
}

fn enumerate_chain(
    vals: &[f64],
    radii: &[f64],
    prev: usize,
    step: usize,
    used: &mut [bool],
) -> u128 {
    if step == radii.len() {
        return 1;
    }
    let mut total = 0u128;
    for i in 0..vals.len() {
        if used[i] || torus_dist(vals[prev], vals[i]) > radii[step] {
            continue;
        }
        used[i] = true;
        total += enumerate_chain(vals, radii, i, step + 1, used);
        used[i] = false;
    }
    total
}

/// Count of distinct ordered (k-1)-tuples within the query windows of a
/// free center `t` (full radii `s_l / N^beta`). No index is excluded:
/// when `t` equals a sequence point, that point may occupy a slot.
pub fn f_count(points: &PointSet, t: UnitPoint, q: &CorrelationQuery) -> Result<u128> {
    f_count_impl(points, t, q, None)
}

/// [`f_count`] with one index barred from every slot; summing this over
/// all anchors `i` at `t = x_i` recovers [`count_box_tuples`].
pub fn f_count_excluding(
    points: &PointSet,
    t: UnitPoint,
    q: &CorrelationQuery,
    exclude: usize,
) -> Result<u128> {
    if exclude >= points.len() {
        return Err(Error::InvalidQuery(format!(
            "excluded index {exclude} out of range for {} points",
            points.len()
        )));
    }
    f_count_impl(points, t, q, Some(exclude))
}

fn f_count_impl(
    points: &PointSet,
    t: UnitPoint,
    q: &CorrelationQuery,
    exclude: Option<usize>,
) -> Result<u128> {
    let n = points.len();
    if n < q.k - 1 {
        return Err(Error::TooFewPoints {
            what: "f_count",
            needed: q.k - 1,
            got: n,
        });
    }
    let mut radii = q.window_radii(n);
    radii.sort_unstable_by(f64::total_cmp);
    let sv = points.sorted();
    let center = t.value();
    let excluded_value = exclude.map(|i| points.values()[i]);
    let mut prod: u128 = 1;
    for (m, &r) in radii.iter().enumerate() {
        let mut c = count_in_window(&sv.values, center, r);
        if let Some(xv) = excluded_value {
            if torus_dist(xv, center) <= r {
                c -= 1;
            }
        }
        if c <= m {
            return Ok(0);
        }
        prod *= (c - m) as u128;
    }
    Ok(prod)
}

/// A continuous piecewise-linear factor with compact support; the first
/// and last breakpoint values must vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    pts: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(pts: Vec<(f64, f64)>) -> Result<Self> {
        if pts.len() < 2 {
            return Err(Error::InvalidTestFunction(
                "need at least two breakpoints".into(),
            ));
        }
        for &(x, y) in &pts {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidTestFunction(format!(
                    "non-finite breakpoint ({x}, {y})"
                )));
            }
        }
        for w in pts.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidTestFunction(format!(
                    "breakpoints must be strictly increasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if pts[0].1 != 0.0 || pts[pts.len() - 1].1 != 0.0 {
            return Err(Error::InvalidTestFunction(
                "first and last breakpoint values must be zero".into(),
            ));
        }
        Ok(Self { pts })
    }

    /// Symmetric tent of the given half width and peak height.
    pub fn tent(half_width: f64, height: f64) -> Result<Self> {
        Self::new(vec![(-half_width, 0.0), (0.0, height), (half_width, 0.0)])
    }

    pub fn support(&self) -> (f64, f64) {
        (self.pts[0].0, self.pts[self.pts.len() - 1].0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo || x >= hi {
            return 0.0;
        }
        // x strictly inside: the segment index is well defined.
        let seg = self.pts.partition_point(|&(px, _)| px <= x) - 1;
        let (x0, y0) = self.pts[seg];
        let (x1, y1) = self.pts[seg + 1];
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }
}

/// Product test function: one piecewise-linear factor per tuple slot.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    factors: Vec<PiecewiseLinear>,
}

impl TestFunction {
    pub fn new(factors: Vec<PiecewiseLinear>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidTestFunction(
                "need at least one factor".into(),
            ));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[PiecewiseLinear] {
        &self.factors
    }
}

/// Weighted generalisation of the box statistic: sums
/// `prod_l f_l(N^beta ((x_{i_l} - x_{i_k})))` over distinct ordered
/// k-tuples and divides by `N^(k-(k-1)beta)`.
///
/// Per anchor only points inside each factor's scaled support can
/// contribute; the per-anchor assignment work is capped by
/// [`DEFAULT_ASSIGNMENT_BOUND`] except on oracle-sized inputs.
pub fn functional_stat(points: &PointSet, q: &CorrelationQuery, f: &TestFunction) -> Result<f64> {
    let n = points.len();
    if n < q.k {
        return Err(Error::TooFewPoints {
            what: "functional_stat",
            needed: q.k,
            got: n,
        });
    }
    if f.factors.len() != q.k - 1 {
        return Err(Error::InvalidTestFunction(format!(
            "expected {} factors for k={}, got {}",
            q.k - 1,
            q.k,
            f.factors.len()
        )));
    }
    let npow = q.npow(n);
    let values = &points.sorted().values;
    // Scaled support radii per slot, as circle distances.
    let ext: Vec<f64> = f
        .factors
        .iter()
        .map(|pl| {
            let (lo, hi) = pl.support();
            (lo.abs().max(hi.abs()) / npow).min(0.5)
        })
        .collect();
    let parts = exec::try_map_indexed(n, |anchor| {
        let x = values[anchor];
        let mut slots: Vec<Vec<(usize, f64)>> = Vec::with_capacity(f.factors.len());
        for (pl, &r) in f.factors.iter().zip(&ext) {
            let mut list = Vec::new();
            for range in window_superset(values, x, r) {
                for i in range {
                    if i == anchor {
                        continue;
                    }
                    let w = pl.eval(npow * signed_nearest(values[i] - x));
                    if w != 0.0 {
                        list.push((i, w));
                    }
                }
            }
            slots.push(list);
        }
        injective_weighted_sum(&slots, n, DEFAULT_ASSIGNMENT_BOUND)
    })?;
    Ok(exec::sum_ordered(&parts) / normalization(n, q.k, q.beta))
}

/// Sum of `prod_l w_l(i_l)` over injective slot assignments.
///
/// Closed forms cover up to two slots; more slots enumerate assignments
/// over the candidate lists, refusing work beyond `bound` unless the input
/// is oracle-sized (`n` at most [`DEFAULT_ORACLE_BOUND`]).
pub(crate) fn injective_weighted_sum(
    slots: &[Vec<(usize, f64)>],
    n: usize,
    bound: u128,
) -> Result<f64> {
    match slots.len() {
        0 => Ok(1.0),
        1 => Ok(slots[0].iter().map(|&(_, w)| w).sum()),
        2 => {
            let s1: f64 = slots[0].iter().map(|&(_, w)| w).sum();
            let s2: f64 = slots[1].iter().map(|&(_, w)| w).sum();
            // Cross term over shared indices; both lists are ascending.
            let mut cross = 0.0;
            let (mut i, mut j) = (0, 0);
            while i < slots[0].len() && j < slots[1].len() {
                match slots[0][i].0.cmp(&slots[1][j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        cross += slots[0][i].1 * slots[1][j].1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            Ok(s1 * s2 - cross)
        }
        _ => {
            let work: u128 = slots.iter().map(|l| l.len() as u128).product();
            if work == 0 {
                return Ok(0.0);
            }
            if work > bound && n > DEFAULT_ORACLE_BOUND {
                return Err(Error::SizeLimit {
                    what: "injective assignment enumeration",
                    size: work,
                    bound,
                });
            }
            let mut order: Vec<usize> = (0..slots.len()).collect();
            order.sort_by_key(|&l| slots[l].len());
            let mut used: Vec<usize> = Vec::with_capacity(slots.len());
            Ok(assignments(slots, &order, 0, &mut used))
        }
    }
}

fn assignments(
    slots: &[Vec<(usize, f64)>],
    order: &[usize],
    depth: usize,
    used: &mut Vec<usize>,
) -> f64 {
    if depth == order.len() {
        return 1.0;
    }
    let mut total = 0.0;
    for &(idx, w) in &slots[order[depth]] {
        if used.contains(&idx) {
            continue;
        }
        used.push(idx);
        total += w * assignments(slots, order, depth + 1, used);
        used.pop();
    }
    total
}

/// Point source for sweeps: an algorithmic spec or a fixed point set.
#[derive(Clone, Debug)]
pub enum Source {
    Spec(SequenceSpec),
    Points(PointSet),
}

impl Source {
    fn prefix(&self, n: usize) -> Result<PointSet> {
        match self {
            Source::Spec(spec) => spec.points(n),
            Source::Points(p) => p.prefix(n),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Spec(s) => write!(f, "{s}"),
            Source::Points(p) => write!(f, "points(n={})", p.len()),
        }
    }
}

/// Rejects grids that are empty, non-increasing, or start below
/// `min_entry`.
pub(crate) fn validate_grid(grid: &[usize], min_entry: usize) -> Result<()> {
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
    if grid[0] < min_entry {
        return Err(Error::InvalidGrid(format!(
            "grid entries must be at least {min_entry}, got {}",
            grid[0]
        )));
    }
    Ok(())
}

/// Evaluates [`r_stat`] on each prefix length of a strictly increasing
/// grid. Prefix stability of the sources makes longer rows refinements of
/// shorter ones rather than fresh samples.
pub fn sweep(
    source: &Source,
    q: &CorrelationQuery,
    grid: &[usize],
) -> Result<Vec<(usize, CorrelationResult)>> {
    validate_grid(grid, q.k)?;
    let base = source.prefix(*grid.last().unwrap())?;
    grid.iter()
        .map(|&n| Ok((n, r_stat(&base.prefix(n)?, q)?)))
        .collect()
}
