//! Data-parallel helpers.
//!
//! Every helper here produces bit-identical results whether it runs on the
//! rayon pool or sequentially: outputs are collected in index order, and sums
//! are reduced over fixed-size chunks whose boundaries do not depend on the
//! thread count. Building without the `parallel` feature, or calling
//! [`sequential`], takes the sequential path.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with all helpers in this module forced onto the calling thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    struct Restore(bool);
    impl Drop for Restore {
        fn drop(&mut self) {
            FORCE_SEQUENTIAL.with(|c| c.set(self.0));
        }
    }
    let _restore = Restore(FORCE_SEQUENTIAL.with(|c| c.replace(true)));
    f()
}

/// Whether the helpers will fan out to the rayon pool from this thread.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// `(0..n).map(f).collect()`, possibly in parallel, always in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Items per reduction chunk in [`sum_vectors`].
pub const CHUNK: usize = 64;

/// Sums the length-`len` vectors produced by `f(i)` for `i in 0..n`.
///
/// Chunk `c` covers items `c*CHUNK .. (c+1)*CHUNK` and is summed in item
/// order; chunk partials are then added in chunk order.
pub fn sum_vectors<F>(n: usize, len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_range(chunks, |c| {
        let mut acc = vec![0.0; len];
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            f(i, &mut acc);
        }
        acc
    });
    let mut total = vec![0.0; len];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}
