//! Data-parallel helpers. With the `parallel` feature these dispatch to
//! rayon when asked; without it everything runs on the calling thread.
//! Results are always collected in input order, so the output does not
//! depend on which path ran.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::points::WeightedPoint;

/// True when this build can actually run work in parallel.
pub const PARALLEL_AVAILABLE: bool = cfg!(feature = "parallel");

pub(crate) fn map_slice<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Sorts by `(x, y, w)` under the IEEE total order. Points that compare
/// equal are identical, so stable, unstable and parallel sorts agree.
pub(crate) fn sort_points(points: &mut [WeightedPoint], parallel: bool) {
    let key = |a: &WeightedPoint, b: &WeightedPoint| {
        a.x.total_cmp(&b.x)
            .then(a.y.total_cmp(&b.y))
            .then(a.w.total_cmp(&b.w))
    };
    #[cfg(feature = "parallel")]
    if parallel {
        points.par_sort_unstable_by(key);
        return;
    }
    let _ = parallel;
    points.sort_unstable_by(key);
}
