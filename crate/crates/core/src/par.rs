//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) point loops run on the rayon pool.
//! Without it, or inside [`sequential`], the same closures run in order on
//! the calling thread. Outputs are written to disjoint slots and reductions
//! use a fixed pairwise tree, so both paths produce identical bits.

use std::cell::Cell;

/// Smallest number of items handed to one rayon task; keeps per-task overhead
/// small against the cheap per-point kernels.
#[cfg(feature = "parallel")]
const MIN_LEN: usize = 256;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with every helper in this module forced onto the sequential path
/// for the current thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    struct Reset(bool);
    impl Drop for Reset {
        fn drop(&mut self) {
            FORCE_SEQUENTIAL.with(|c| c.set(self.0));
        }
    }
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let _reset = Reset(prev);
    f()
}

/// True when helpers called from this thread dispatch to rayon.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Evaluates `f(i)` for `i in 0..n` and collects the results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().with_min_len(MIN_LEN).map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Fallible variant of [`map_indexed`]; the error reported is the one with
/// the lowest index so that failures are deterministic.
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    let results = map_indexed(n, f);
    results.into_iter().collect()
}

/// Applies `f(i, &mut x[i])` to every element.
pub fn for_each_mut<T, F>(xs: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        xs.par_iter_mut().with_min_len(MIN_LEN).enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    xs.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Applies `f(i, chunk_i)` to consecutive chunks of length `chunk`.
pub fn for_each_chunk_mut<F>(xs: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        xs.par_chunks_mut(chunk).with_min_len(MIN_LEN).enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    xs.chunks_mut(chunk).enumerate().for_each(|(i, x)| f(i, x));
}

/// Pairwise summation with a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `Σ_i f(i)` with parallel evaluation and a deterministic reduction.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    pairwise_sum(&map_indexed(n, f))
}

/// Configures the global rayon pool. Returns false if the pool was already
/// initialised or the crate was built without the `parallel` feature.
pub fn init_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}
