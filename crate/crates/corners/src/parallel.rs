//! Thin switch between rayon and sequential execution.
//!
//! With the default `parallel` feature the replica loops and tensor-product
//! quadrature grids fan out over rayon; without it the same code runs on
//! plain iterators, which keeps the crate usable on targets where spawning
//! threads is unwanted.

/// Maps `0..n` through `f` and collects, in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sum of `f(i)` for `i` in `0..n`, evaluated in parallel but reduced in
/// index order so results are bit-identical across runs and thread counts.
pub fn sum_indexed<F>(n: usize, f: F) -> num_complex::Complex64
where
    F: Fn(usize) -> num_complex::Complex64 + Sync + Send,
{
    map_indexed(n, f).into_iter().sum()
}
