//! Compensated summation and the fixed-shape parallel reductions built on it.

use rayon::prelude::*;

use crate::Scalar;

/// Rows per work unit in parallel reductions. Fixed so that the reduction
/// tree, and therefore the rounding, does not depend on the thread count.
pub(crate) const CHUNK: usize = 64;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct NeumaierSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> NeumaierSum<T> {
    pub(crate) fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    #[inline]
    pub(crate) fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Sums `f(i)` for `i in 0..n`, chunked into fixed blocks of [`CHUNK`]
/// indices. Block partials are combined in index order, so the result is
/// bitwise identical for any number of worker threads.
pub(crate) fn chunked_sum<T, F>(n: usize, f: F) -> T
where
    T: Scalar,
    F: Fn(usize) -> T + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let block = |c: usize| {
        let mut acc = NeumaierSum::new();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            acc.add(f(i));
        }
        acc.value()
    };
    let partials: Vec<T> = if n_chunks > 4 {
        (0..n_chunks).into_par_iter().map(block).collect()
    } else {
        (0..n_chunks).map(block).collect()
    };
    let mut total = NeumaierSum::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}
