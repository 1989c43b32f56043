//! Order-stable parallel reductions.
//!
//! Row ranges are cut into fixed-size chunks, each chunk is folded
//! sequentially and the chunk partials are combined in chunk order. The
//! result is therefore bit-identical for every rayon pool size.

use rayon::prelude::*;

/// Rows per chunk for the fixed partition.
pub const CHUNK: usize = 4096;

pub(crate) fn chunk_ranges(n: usize, chunk: usize) -> impl IndexedParallelIterator<Item = std::ops::Range<usize>> {
    let chunks = n.div_ceil(chunk);
    (0..chunks).into_par_iter().map(move |c| {
        let lo = c * chunk;
        lo..(lo + chunk).min(n)
    })
}

/// Sums `dim`-vectors produced by `term(i, acc)` for `i in 0..n`.
///
/// `term` adds its contribution into `acc`.
pub fn chunked_sum<F>(n: usize, dim: usize, term: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let partials: Vec<Vec<f64>> = chunk_ranges(n, CHUNK)
        .map(|range| {
            let mut acc = vec![0.0; dim];
            for i in range {
                term(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; dim];
    for partial in &partials {
        for (t, p) in total.iter_mut().zip(partial) {
            *t += p;
        }
    }
    total
}

/// Scalar convenience wrapper around [`chunked_sum`].
pub fn chunked_sum_scalar<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    chunked_sum(n, 1, |i, acc| acc[0] += term(i))[0]
}
