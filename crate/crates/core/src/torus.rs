//! Arithmetic on the unit torus [0, 1).
//!
//! All distances are circle distances: `torus_dist(x, y)` is the length of
//! the shorter arc between the reductions of `x` and `y`, so it lives in
//! [0, 1/2]. The signed representative `signed_nearest` lives in
//! [-1/2, 1/2); the boundary case, a fractional part of exactly 1/2, maps
//! to -1/2 so the interval stays half-open.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fractional part of `x`, reduced to [0, 1). `frac(-0.1)` is `0.9`.
///
/// Panics on non-finite input; validated entry points are [`UnitPoint`]
/// and the point-set constructors.
pub fn frac(x: f64) -> f64 {
    assert!(x.is_finite(), "frac: non-finite input {x}");
    let f = x - x.floor();
    // x - floor(x) can round up to exactly 1.0 for tiny negative x.
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Signed representative of `x` nearest to zero, in [-1/2, 1/2).
pub fn signed_nearest(x: f64) -> f64 {
    let f = frac(x);
    if f < 0.5 {
        f
    } else {
        f - 1.0
    }
}

/// Circle distance between the reductions of `x` and `y`, in [0, 1/2].
///
/// Reduces each argument separately so the result is exactly symmetric:
/// `frac(x) - frac(y)` and its swapped twin are exact negations of each
/// other, whereas reducing `x - y` as a whole rounds differently per order.
pub fn torus_dist(x: f64, y: f64) -> f64 {
    let raw = (frac(x) - frac(y)).abs();
    raw.min(1.0 - raw)
}

/// Length of the intersection of the closed arcs `B(x, r1)` and `B(y, r2)`.
///
/// Radii at least 1/2 cover the whole circle, so they clamp to 1/2 and the
/// result saturates at 1. The two arcs may meet on both sides of the
/// circle; both contributions count.
pub fn arc_overlap(x: f64, r1: f64, y: f64, r2: f64) -> Result<f64> {
    for (what, v) in [("center", x), ("center", y), ("radius", r1), ("radius", r2)] {
        if !v.is_finite() {
            return Err(Error::NonFinite { what, value: v });
        }
    }
    if r1 < 0.0 {
        return Err(Error::NegativeRadius(r1));
    }
    if r2 < 0.0 {
        return Err(Error::NegativeRadius(r2));
    }
    Ok(arc_overlap_at_dist(torus_dist(x, y), r1, r2))
}

/// `arc_overlap` with the center distance already computed and radii
/// already validated. Hot paths call this after one validation per query.
pub(crate) fn arc_overlap_at_dist(d: f64, r1: f64, r2: f64) -> f64 {
    let p1 = r1.min(0.5);
    let p2 = r2.min(0.5);
    let near = (p1 + p2 - d).max(0.0);
    let far = (p1 + p2 - (1.0 - d)).max(0.0);
    (near + far).min(2.0 * p1).min(2.0 * p2).min(1.0)
}

/// A point of the unit torus: a finite real reduced to [0, 1).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitPoint(f64);

impl UnitPoint {
    /// Reduces any finite real onto the torus.
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite {
                what: "torus point",
                value: x,
            });
        }
        Ok(Self(frac(x)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for UnitPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
