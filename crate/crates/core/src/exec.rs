//! Data-parallel execution of per-anchor kernels.
//!
//! Every counting kernel is a map over anchor indices followed by a
//! reduction. The map runs on rayon when the `parallel` feature is on and
//! sequentially otherwise; either way the partials land in a vector in
//! anchor order and the reduction folds that vector left to right. Output
//! bytes therefore never depend on the feature choice or the thread count.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().with_min_len(64).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Fallible variant: evaluates every index, then surfaces the first error
/// in index order (deterministic regardless of which thread hit it).
pub(crate) fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    let parts = map_indexed(n, f);
    let mut out = Vec::with_capacity(n);
    for part in parts {
        out.push(part?);
    }
    Ok(out)
}

/// Left-to-right sum of per-anchor floating partials.
pub(crate) fn sum_ordered(parts: &[f64]) -> f64 {
    parts.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_index_order() {
        let v = map_indexed(1000, |i| i * i);
        assert_eq!(v[17], 289);
        assert_eq!(v.len(), 1000);
    }

    #[test]
    fn try_map_reports_first_error_in_index_order() {
        let r: Result<Vec<usize>, usize> =
            try_map_indexed(100, |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
        assert_eq!(r.unwrap_err(), 29);
    }

    #[test]
    fn ordered_sum_is_sequential_fold() {
        let xs = vec![1e16, 1.0, -1e16, 1.0];
        // (1e16 + 1) loses the 1; the test pins the fold order.
        assert_eq!(sum_ordered(&xs), 1.0);
    }
}
