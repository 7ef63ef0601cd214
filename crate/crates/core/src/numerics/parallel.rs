//! Fixed-order data-parallel evaluation.
//!
//! Work is split into index chunks of [`CHUNK_LEN`] whose boundaries depend
//! only on the problem size, never on the number of threads. Each chunk is
//! reduced sequentially and the chunk partials are merged in chunk order, so
//! every result is bit-identical for any worker count. Without the
//! `parallel` feature everything runs on the calling thread.

use serde::{Deserialize, Serialize};

use super::KahanSum;
use crate::Result;

pub const CHUNK_LEN: usize = 1024;

/// Requested worker count; `0` means one worker per available core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Workers(pub usize);

impl Workers {
    pub const AUTO: Workers = Workers(0);
    pub const SEQUENTIAL: Workers = Workers(1);

    pub fn is_sequential(self) -> bool {
        self.0 == 1 || !cfg!(feature = "parallel")
    }
}

#[cfg(feature = "parallel")]
fn run_in_pool<T: Send>(workers: Workers, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.0)
        .build()
        .map_err(|e| crate::Error::ThreadPool(e.to_string()))?;
    Ok(pool.install(job))
}

/// Evaluates `f(chunk_range)` for every chunk of `0..len` and returns the
/// results in chunk order.
pub fn map_chunked<T, F>(len: usize, chunk_len: usize, workers: Workers, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk_len = chunk_len.max(1);
    let chunks = len.div_ceil(chunk_len);
    let range = |c: usize| c * chunk_len..((c + 1) * chunk_len).min(len);
    if workers.is_sequential() {
        return Ok((0..chunks).map(|c| f(range(c))).collect());
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        run_in_pool(workers, || {
            (0..chunks).into_par_iter().map(|c| f(range(c))).collect()
        })
    }
    #[cfg(not(feature = "parallel"))]
    unreachable!("sequential path taken above")
}

/// Compensated sums of `K` per-index statistics over `0..len`.
pub fn map_reduce_kahan<const K: usize, F>(
    len: usize,
    workers: Workers,
    f: F,
) -> Result<[KahanSum; K]>
where
    F: Fn(usize) -> [f64; K] + Sync + Send,
{
    let partials = map_chunked(len, CHUNK_LEN, workers, |range| {
        let mut acc = [KahanSum::new(); K];
        for i in range {
            for (a, v) in acc.iter_mut().zip(f(i)) {
                a.add(v);
            }
        }
        acc
    })?;
    let mut total = [KahanSum::new(); K];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total)
}
