//! Deterministic parallel reductions.
//!
//! Rows of a double sum are evaluated in parallel, collected in index order and
//! combined with a fixed pairwise tree, so results do not depend on the number
//! of worker threads.

use rayon::prelude::*;

pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len if len <= 8 => values.iter().sum(),
        len => {
            let (lo, hi) = values.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Evaluates `row(i)` for `i in 0..n` in parallel and returns the values in order.
pub(crate) fn rows<T, F>(n: usize, row: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(row).collect()
}

pub(crate) fn sum_rows<F>(n: usize, row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    pairwise_sum(&rows(n, row))
}

/// Like [`sum_rows`], but rows may fail; the error of the lowest failing row wins.
pub(crate) fn try_sum_rows<E, F>(n: usize, row: F) -> Result<f64, E>
where
    E: Send,
    F: Fn(usize) -> Result<f64, E> + Sync + Send,
{
    let values = rows(n, row)
        .into_iter()
        .collect::<Result<Vec<f64>, E>>()?;
    Ok(pairwise_sum(&values))
}
