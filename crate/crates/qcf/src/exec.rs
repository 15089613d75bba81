//! Grid execution: data-parallel map over independent sweep cells.
//!
//! Results are collected in input order, so output files are byte-identical
//! no matter how many worker threads run (`RAYON_NUM_THREADS` controls the
//! pool when the `parallel` feature is on).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over the cells, in parallel when the `parallel` feature is
/// enabled. Ordering of the output always matches the input.
#[cfg(feature = "parallel")]
pub fn map_cells<T, U, F>(cells: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    cells.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_cells<T, U, F>(cells: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_cells_seq(cells, f)
}

/// Sequential reference path; the benchmarks compare this against
/// [`map_cells`] on the same grids.
pub fn map_cells_seq<T, U, F>(cells: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    cells.iter().map(f).collect()
}
