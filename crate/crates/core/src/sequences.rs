//! Point sources on the unit torus.
//!
//! Generation is prefix-stable for every kind: the first `n` points of a
//! longer run equal `generate(spec, n)` bit for bit. The seeded uniform
//! kind draws from ChaCha8 (rand_chacha), one value per point in stream
//! order, so runs are reproducible across platforms for a fixed seed.

use crate::error::{Error, Result};
use crate::torus::frac;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

/// Recipe for a point sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum SequenceSpec {
    /// `x_n = frac(n * alpha)`, n = 1, 2, ...
    Kronecker { alpha: f64 },
    /// Base-`base` radical inverses; with `include_zero` the sequence is
    /// 0, g(1), g(2), ... and without it g(1), g(2), ...
    VanDerCorput { base: u32, include_zero: bool },
    /// Independent uniforms from a seeded ChaCha8 stream.
    UniformRandom { seed: u64 },
    /// Points stored one per line in a text file; see [`load`].
    File { path: PathBuf },
}

impl SequenceSpec {
    fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::Kronecker { alpha } => {
                if !alpha.is_finite() {
                    return Err(Error::NonFinite {
                        what: "alpha",
                        value: *alpha,
                    });
                }
            }
            SequenceSpec::VanDerCorput { base, .. } => {
                if *base < 2 {
                    return Err(Error::InvalidQuery(format!(
                        "van der Corput base must be at least 2, got {base}"
                    )));
                }
            }
            SequenceSpec::UniformRandom { .. } | SequenceSpec::File { .. } => {}
        }
        Ok(())
    }

    /// First `n` points regardless of kind; file-backed specs are loaded
    /// and truncated. This is what sweeps and experiments use.
    pub fn points(&self, n: usize) -> Result<PointSet> {
        match self {
            SequenceSpec::File { path } => {
                let full = load(path)?;
                if full.len() < n {
                    return Err(Error::TooFewPoints {
                        what: "file-backed sequence",
                        needed: n,
                        got: full.len(),
                    });
                }
                full.prefix(n)
            }
            _ => generate(self, n),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            SequenceSpec::UniformRandom { seed } => Some(*seed),
            _ => None,
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Kronecker { alpha } => write!(f, "kronecker(alpha={alpha})"),
            SequenceSpec::VanDerCorput { base, include_zero } => {
                write!(
                    f,
                    "van_der_corput(base={base}, include_zero={include_zero})"
                )
            }
            SequenceSpec::UniformRandom { seed } => write!(f, "uniform_random(seed={seed})"),
            SequenceSpec::File { path } => write!(f, "file({})", path.display()),
        }
    }
}

/// Accepts a decimal literal or one of the tokens `sqrt2`,
/// `sqrt2_over_5`, `golden`.
pub fn parse_alpha(token: &str) -> Result<f64> {
    match token {
        "sqrt2" => Ok(std::f64::consts::SQRT_2),
        "sqrt2_over_5" => Ok(std::f64::consts::SQRT_2 / 5.0),
        "golden" => Ok((1.0 + 5.0f64.sqrt()) / 2.0),
        other => match other.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::UnknownAlpha(other.to_string())),
        },
    }
}

/// A finite multiset of torus points in generation order, with a lazily
/// built sorted view. Duplicate values are kept: indices are the tuple
/// members everywhere in this crate, not values.
#[derive(Debug)]
pub struct PointSet {
    values: Vec<f64>,
    sorted: OnceLock<SortedView>,
}

#[derive(Debug, Clone)]
pub struct SortedView {
    /// Values in ascending order.
    pub values: Vec<f64>,
    /// `perm[p]` is the original index of the p-th smallest value.
    pub perm: Vec<usize>,
    /// `position[i]` is the sorted position of original index `i`.
    pub position: Vec<usize>,
}

impl Clone for PointSet {
    fn clone(&self) -> Self {
        PointSet {
            values: self.values.clone(),
            sorted: OnceLock::new(),
        }
    }
}

impl PointSet {
    /// Validates finiteness and reduces every value to [0, 1).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "point",
                    value: v,
                });
            }
        }
        Ok(Self::from_reduced(values.into_iter().map(frac).collect()))
    }

    pub(crate) fn from_reduced(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..1.0).contains(v)));
        PointSet {
            values,
            sorted: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Points in generation order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// First `n` points in generation order.
    pub fn prefix(&self, n: usize) -> Result<PointSet> {
        if n > self.len() {
            return Err(Error::TooFewPoints {
                what: "prefix",
                needed: n,
                got: self.len(),
            });
        }
        Ok(PointSet::from_reduced(self.values[..n].to_vec()))
    }

    /// Sorted view, built on first use and cached.
    pub fn sorted(&self) -> &SortedView {
        self.sorted.get_or_init(|| {
            let n = self.values.len();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.sort_unstable_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
            let mut position = vec![0usize; n];
            let mut values = Vec::with_capacity(n);
            for (p, &i) in perm.iter().enumerate() {
                position[i] = p;
                values.push(self.values[i]);
            }
            SortedView {
                values,
                perm,
                position,
            }
        })
    }
}

/// Generates the first `n` points of an algorithmic spec. File-backed
/// specs must go through [`load`] (or [`SequenceSpec::points`]).
pub fn generate(spec: &SequenceSpec, n: usize) -> Result<PointSet> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::TooFewPoints {
            what: "generate",
            needed: 1,
            got: 0,
        });
    }
    let values = match spec {
        SequenceSpec::Kronecker { alpha } => (1..=n).map(|i| frac(i as f64 * alpha)).collect(),
        SequenceSpec::VanDerCorput { base, include_zero } => {
            let b = *base as u64;
            if *include_zero {
                std::iter::once(0.0)
                    .chain((1..n as u64).map(|i| radical_inverse(i, b)))
                    .collect()
            } else {
                (1..=n as u64).map(|i| radical_inverse(i, b)).collect()
            }
        }
        SequenceSpec::UniformRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n).map(|_| rng.gen::<f64>()).collect()
        }
        SequenceSpec::File { .. } => return Err(Error::GenerateFromFile),
    };
    Ok(PointSet::from_reduced(values))
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let b = base as f64;
    let mut scale = 1.0 / b;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * scale;
        scale /= b;
        i /= base;
    }
    debug_assert!((0.0..1.0).contains(&x));
    x
}

/// Reads a point file: one decimal real per line, `#` starts a comment
/// line, blank lines are ignored. Values are reduced to [0, 1). Errors
/// carry 1-based line numbers.
pub fn load(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|e| Error::Parse {
            line: idx + 1,
            message: format!("{e}: {line:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("non-finite value {line:?}"),
            });
        }
        values.push(frac(v));
    }
    if values.is_empty() {
        return Err(Error::EmptyFile {
            path: path.display().to_string(),
        });
    }
    Ok(PointSet::from_reduced(values))
}
