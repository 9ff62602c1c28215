//! Integrated forms of the correlation statistic.
//!
//! `g_beta` counts ordered distinct (k-1)-tuples landing in half-radius
//! windows around a free evaluation point `t`, `h_beta` counts single
//! indices in the intersection of those windows, and the integral of
//! their product over `t` in `[0,1]^(k-1)` has an exact finite-N value
//! computed by [`gh_integral_closed`]: a tuple term weighting every
//! distinct ordered k-tuple by arc-overlap measures, plus a diagonal
//! term for tuples that reuse the single index. A midpoint-rule
//! quadrature serves as an independent oracle for that closed form.
//!
//! The module also carries the hinge sum (the integral of the box
//! statistic over its window-scale box), the `phi` recursion giving the
//! beta = 1 limit of the G.H integral, and the inclusion-exclusion
//! helpers used to reduce box indicators to corner boxes.

use crate::correlations::{injective_weighted_sum, nexp, normalization, CorrelationQuery};
use crate::error::{Error, Result};
use crate::exec;
use crate::sequences::PointSet;
use crate::torus::{arc_overlap_at_dist, torus_dist, UnitPoint};
use crate::window::window_superset;
use std::collections::HashMap;

/// A correlation query together with a free evaluation point
/// `t = (t_1, ..., t_{k-1})`, one torus coordinate per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct GHQuery {
    q: CorrelationQuery,
    t: Vec<f64>,
}

impl GHQuery {
    /// Requires one coordinate per slot; coordinates are reduced mod 1.
    pub fn new(q: CorrelationQuery, t: Vec<f64>) -> Result<Self> {
        if t.len() != q.k() - 1 {
            return Err(Error::InvalidQuery(format!(
                "expected {} evaluation coordinates for k={}, got {}",
                q.k() - 1,
                q.k(),
                t.len()
            )));
        }
        let mut reduced = Vec::with_capacity(t.len());
        for v in t {
            reduced.push(UnitPoint::new(v)?.value());
        }
        Ok(Self { q, t: reduced })
    }

    pub fn query(&self) -> &CorrelationQuery {
        &self.q
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }
}

/// Half radii `s_l / (2 N^beta)` in slot order.
fn half_radii(q: &CorrelationQuery, n: usize) -> Vec<f64> {
    let p = q.npow(n);
    q.s().iter().map(|&s| s / (2.0 * p)).collect()
}

/// Candidate list for one slot: indices into the sorted values whose
/// distance to `center` keeps `weight` nonzero, tagged with that weight.
/// `skip` excludes one index (the anchor) from the list.
fn weighted_candidates(
    values: &[f64],
    center: f64,
    search_radius: f64,
    skip: Option<usize>,
    weight: impl Fn(f64) -> f64,
) -> Vec<(usize, f64)> {
    let mut list = Vec::new();
    for range in window_superset(values, center, search_radius.min(0.5)) {
        for i in range {
            if skip == Some(i) {
                continue;
            }
            let w = weight(torus_dist(values[i], center));
            if w != 0.0 {
                list.push((i, w));
            }
        }
    }
    list
}

/// Count of ordered distinct (k-1)-tuples with
/// `dist(x_{i_l}, t_l) <= s_l / (2 N^beta)` for every slot, normalised
/// by `N^((k-1)(1-beta))`.
///
/// The windows sit at unrelated centers, so the count enumerates
/// injective assignments over per-slot candidate lists (closed forms for
/// up to two slots); work beyond the assignment bound is refused on
/// inputs too large to enumerate exhaustively.
pub fn g_beta(points: &PointSet, gh: &GHQuery) -> Result<f64> {
    let n = points.len();
    let k = gh.q.k();
    if n < k - 1 {
        return Err(Error::TooFewPoints {
            what: "g_beta",
            needed: k - 1,
            got: n,
        });
    }
    let radii = half_radii(&gh.q, n);
    let values = &points.sorted().values;
    let raw = g_raw(values, &gh.t, &radii, n)?;
    Ok(raw / nexp(n, (k as f64 - 1.0) * (1.0 - gh.q.beta())))
}

fn g_raw(values: &[f64], t: &[f64], radii: &[f64], n: usize) -> Result<f64> {
    let slots: Vec<Vec<(usize, f64)>> = t
        .iter()
        .zip(radii)
        .map(|(&tl, &r)| {
            weighted_candidates(values, tl, r, None, |d| if d <= r { 1.0 } else { 0.0 })
        })
        .collect();
    injective_weighted_sum(&slots, n, crate::correlations::DEFAULT_ASSIGNMENT_BOUND)
}

/// Count of single indices lying in every window
/// `dist(x_i, t_l) <= s_l / (2 N^beta)` simultaneously, normalised by
/// `N^(1-(k-1)beta)`.
pub fn h_beta(points: &PointSet, gh: &GHQuery) -> Result<f64> {
    let n = points.len();
    if n == 0 {
        return Err(Error::TooFewPoints {
            what: "h_beta",
            needed: 1,
            got: 0,
        });
    }
    let radii = half_radii(&gh.q, n);
    let raw = h_raw(points.values(), &gh.t, &radii);
    let k = gh.q.k();
    Ok(raw as f64 / nexp(n, 1.0 - (k as f64 - 1.0) * gh.q.beta()))
}

fn h_raw(values: &[f64], t: &[f64], radii: &[f64]) -> usize {
    values
        .iter()
        .filter(|&&v| t.iter().zip(radii).all(|(&tl, &r)| torus_dist(v, tl) <= r))
        .count()
}

/// Sum of `prod_l {s_l - N^beta dist(x_{i_l}, x_{i_k})}^+` over distinct
/// ordered k-tuples, divided by `N^(k-(k-1)beta)`. This equals the
/// integral of the normalised box statistic over the window-scale box
/// `[0,s_1] x ... x [0,s_{k-1}]`.
pub fn hinge_sum(points: &PointSet, q: &CorrelationQuery) -> Result<f64> {
    let n = points.len();
    if n < q.k() {
        return Err(Error::TooFewPoints {
            what: "hinge_sum",
            needed: q.k(),
            got: n,
        });
    }
    let npow = q.npow(n);
    let s = q.s().to_vec();
    let values = &points.sorted().values;
    let parts = exec::try_map_indexed(n, |anchor| {
        let x = values[anchor];
        let slots: Vec<Vec<(usize, f64)>> = s
            .iter()
            .map(|&sl| {
                weighted_candidates(values, x, sl / npow, Some(anchor), |d| {
                    (sl - npow * d).max(0.0)
                })
            })
            .collect();
        injective_weighted_sum(&slots, n, crate::correlations::DEFAULT_ASSIGNMENT_BOUND)
    })?;
    Ok(exec::sum_ordered(&parts) / normalization(n, q.k(), q.beta()))
}

/// Exact value of the integral of `g_beta * h_beta` over
/// `t in [0,1]^(k-1)`, split into its tuple and diagonal terms.
///
/// Expanding the product of counts and integrating each slot separately
/// turns every factor into the overlap measure of two radius
/// `s_l/(2N^beta)` balls. Tuples whose single index is distinct from all
/// slots give the first term; tuples reusing slot j's index give the
/// second, where the j-th factor degenerates to a full ball measure.
pub fn gh_integral_parts(points: &PointSet, q: &CorrelationQuery) -> Result<(f64, f64)> {
    let n = points.len();
    let k = q.k();
    if n < k {
        return Err(Error::TooFewPoints {
            what: "gh_integral_parts",
            needed: k,
            got: n,
        });
    }
    let rho = half_radii(q, n);
    let values = &points.sorted().values;
    let bound = crate::correlations::DEFAULT_ASSIGNMENT_BOUND;

    let tuple_parts = exec::try_map_indexed(n, |anchor| {
        let x = values[anchor];
        let slots: Vec<Vec<(usize, f64)>> = rho
            .iter()
            .map(|&r| {
                weighted_candidates(values, x, 2.0 * r, Some(anchor), |d| {
                    arc_overlap_at_dist(d, r, r)
                })
            })
            .collect();
        injective_weighted_sum(&slots, n, bound)
    })?;
    let raw_tuple = exec::sum_ordered(&tuple_parts);

    let mut raw_diag = 0.0;
    for j in 0..k - 1 {
        let full_ball = arc_overlap_at_dist(0.0, rho[j], rho[j]);
        let rho_rest: Vec<f64> = rho
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != j)
            .map(|(_, &r)| r)
            .collect();
        let parts = exec::try_map_indexed(n, |anchor| {
            let x = values[anchor];
            let slots: Vec<Vec<(usize, f64)>> = rho_rest
                .iter()
                .map(|&r| {
                    weighted_candidates(values, x, 2.0 * r, Some(anchor), |d| {
                        arc_overlap_at_dist(d, r, r)
                    })
                })
                .collect();
            injective_weighted_sum(&slots, n, bound)
        })?;
        raw_diag += full_ball * exec::sum_ordered(&parts);
    }

    let norm = nexp(n, k as f64 - 2.0 * (k as f64 - 1.0) * q.beta());
    Ok((raw_tuple / norm, raw_diag / norm))
}

/// Sum of the two terms of [`gh_integral_parts`].
pub fn gh_integral_closed(points: &PointSet, q: &CorrelationQuery) -> Result<f64> {
    let (tuple, diag) = gh_integral_parts(points, q)?;
    Ok(tuple + diag)
}

/// Midpoint-rule estimate of the integral of `g_beta * h_beta` over
/// `[0,1]^(k-1)`; an independent oracle for [`gh_integral_closed`].
/// Restricted to k = 2 or 3 (quadrature dimension at most 2); nodes at
/// cell midpoints keep indicator discontinuities off the grid.
pub fn gh_integral_quadrature(
    points: &PointSet,
    q: &CorrelationQuery,
    resolution: usize,
) -> Result<f64> {
    let k = q.k();
    if k > 3 {
        return Err(Error::InvalidQuery(format!(
            "quadrature supports k = 2 or 3, got k={k}"
        )));
    }
    if resolution < 10 {
        return Err(Error::InvalidQuery(format!(
            "quadrature resolution must be at least 10, got {resolution}"
        )));
    }
    let n = points.len();
    if n < k - 1 {
        return Err(Error::TooFewPoints {
            what: "gh_integral_quadrature",
            needed: k - 1,
            got: n,
        });
    }
    let radii = half_radii(q, n);
    let values = &points.sorted().values;
    let g_norm = nexp(n, (k as f64 - 1.0) * (1.0 - q.beta()));
    let h_norm = nexp(n, 1.0 - (k as f64 - 1.0) * q.beta());
    let dims = k - 1;
    let cells = resolution.pow(dims as u32);
    let res_f = resolution as f64;
    let node_values = exec::try_map_indexed(cells, |idx| {
        let t: Vec<f64> = if dims == 1 {
            vec![(idx as f64 + 0.5) / res_f]
        } else {
            vec![
                ((idx / resolution) as f64 + 0.5) / res_f,
                ((idx % resolution) as f64 + 0.5) / res_f,
            ]
        };
        let g = g_raw(values, &t, &radii, n)? / g_norm;
        let h = h_raw(points.values(), &t, &radii) as f64 / h_norm;
        Ok::<f64, Error>(g * h)
    })?;
    Ok(exec::sum_ordered(&node_values) / res_f.powi(dims as i32))
}

/// The beta = 1 limit value of the G.H integral:
/// `phi(()) = 1` and `phi(s) = prod_i s_i^2 + sum_j s_j phi(s minus s_j)`.
/// Arguments are sorted first, so the value is exactly permutation
/// symmetric; subproblems are memoised on their sorted bit patterns.
pub fn phi(s: &[f64]) -> Result<f64> {
    for &v in s {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::NotPositive {
                what: "phi argument",
                value: v,
            });
        }
    }
    let mut sorted = s.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut memo = HashMap::new();
    Ok(phi_rec(&sorted, &mut memo))
}

fn phi_rec(s: &[f64], memo: &mut HashMap<Vec<u64>, f64>) -> f64 {
    if s.is_empty() {
        return 1.0;
    }
    let key: Vec<u64> = s.iter().map(|v| v.to_bits()).collect();
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut value: f64 = s.iter().map(|&v| v * v).product();
    for j in 0..s.len() {
        let mut rest = Vec::with_capacity(s.len() - 1);
        rest.extend_from_slice(&s[..j]);
        rest.extend_from_slice(&s[j + 1..]);
        value += s[j] * phi_rec(&rest, memo);
    }
    memo.insert(key, value);
    value
}

/// Maximum box dimension accepted by the corner expansions (the output
/// has 2^k entries).
const MAX_CORNER_DIM: usize = 20;

/// Signed corner boxes whose indicator sum equals the indicator of
/// `prod_i [a_i, b_i]` almost everywhere: for each subset P of axes the
/// corner takes `a_i` on P and `b_i` elsewhere, signed by `(-1)^|P|`.
/// Corners are emitted in ascending bitmask order (bit i selects `a_i`).
pub fn inclusion_exclusion_expand(a: &[f64], b: &[f64]) -> Result<Vec<(i32, Vec<f64>)>> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidQuery(format!(
            "corner expansion needs matching nonempty bounds, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() > MAX_CORNER_DIM {
        return Err(Error::SizeLimit {
            what: "corner expansion dimension",
            size: a.len() as u128,
            bound: MAX_CORNER_DIM as u128,
        });
    }
    for (&ai, &bi) in a.iter().zip(b) {
        if !ai.is_finite() || !bi.is_finite() || ai < 0.0 || ai >= bi {
            return Err(Error::InvalidQuery(format!(
                "corner bounds must satisfy 0 <= a < b, got a={ai} b={bi}"
            )));
        }
    }
    let k = a.len();
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0usize..(1 << k) {
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        let corner: Vec<f64> = (0..k)
            .map(|i| if mask >> i & 1 == 1 { a[i] } else { b[i] })
            .collect();
        out.push((sign, corner));
    }
    Ok(out)
}

/// The alternating corner sum and its leading term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CornerSum {
    /// `sum_P (-1)^|P| prod_{i in P} (s_i - eps)^2 prod_{i not in P} s_i^2`.
    pub exact: f64,
    /// `prod_i 2 s_i eps`.
    pub leading: f64,
}

/// Evaluates the alternating sum over the 2^m subsets literally (the
/// factorised form `prod_i (2 s_i eps - eps^2)` is reserved for tests)
/// together with its leading term. Requires `0 < eps < min(s)`.
pub fn corner_alternating_sum(s: &[f64], eps: f64) -> Result<CornerSum> {
    if s.len() > MAX_CORNER_DIM {
        return Err(Error::SizeLimit {
            what: "corner sum dimension",
            size: s.len() as u128,
            bound: MAX_CORNER_DIM as u128,
        });
    }
    for &v in s {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::NotPositive {
                what: "corner sum scale",
                value: v,
            });
        }
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::NotPositive {
            what: "corner sum epsilon",
            value: eps,
        });
    }
    if let Some(&min) = s.iter().min_by(|x, y| x.total_cmp(y)) {
        if eps >= min {
            return Err(Error::InvalidQuery(format!(
                "epsilon must stay below the smallest scale, got eps={eps} min={min}"
            )));
        }
    }
    let m = s.len();
    let mut exact = 0.0;
    for mask in 0usize..(1 << m) {
        let sign = if mask.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let mut prod = sign;
        for (i, &si) in s.iter().enumerate() {
            let side = if mask >> i & 1 == 1 { si - eps } else { si };
            prod *= side * side;
        }
        exact += prod;
    }
    let leading = s.iter().map(|&si| 2.0 * si * eps).product();
    Ok(CornerSum { exact, leading })
}
