//! Work scheduling over index ranges.
//!
//! Every helper here returns the same result under either schedule. Work
//! items are addressed by index, and reductions are applied in index order.

use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Smallest index run handed to one rayon task. Lab items are cheap enough
/// that finer splitting costs more than it saves.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 256;

/// `u64` ranges are not indexed in rayon; work items always fit a `usize`.
#[cfg(feature = "parallel")]
fn indexed(range: Range<u64>) -> impl rayon::iter::IndexedParallelIterator<Item = u64> {
    use rayon::prelude::*;
    let to = |x: u64| usize::try_from(x).expect("work range fits in usize");
    (to(range.start)..to(range.end))
        .into_par_iter()
        .with_min_len(MIN_CHUNK)
        .map(|i| i as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Sequential,
    /// Data-parallel on the rayon pool. Falls back to sequential when the
    /// `parallel` feature is disabled.
    #[default]
    Parallel,
}

impl Schedule {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Schedule::Parallel
    }
}

/// `range.map(f).collect()` in index order.
pub fn map_range<T, F>(schedule: Schedule, range: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if schedule.is_parallel() {
        use rayon::prelude::*;
        return indexed(range).map(f).collect();
    }
    let _ = schedule;
    range.map(f).collect()
}

/// Smallest index in `range` satisfying `pred`.
pub fn find_first<F>(schedule: Schedule, range: Range<u64>, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if schedule.is_parallel() {
        use rayon::prelude::*;
        return indexed(range).find_first(|i| pred(*i));
    }
    let _ = schedule;
    range.into_iter().find(|i| pred(*i))
}

/// Maps every index and folds the results with an associative `combine`.
pub fn map_reduce<T, F, C>(schedule: Schedule, range: Range<u64>, identity: T, f: F, combine: C) -> T
where
    T: Send + Sync + Clone,
    F: Fn(u64) -> T + Sync + Send,
    C: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if schedule.is_parallel() {
        use rayon::prelude::*;
        return indexed(range)
            .map(f)
            .reduce(|| identity.clone(), &combine);
    }
    let _ = schedule;
    range.map(f).fold(identity, combine)
}
