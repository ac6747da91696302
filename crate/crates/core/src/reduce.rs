//! Deterministic data-parallel primitives.
//!
//! Every reduction here uses a fixed-shape pairwise tree whose split points
//! depend only on the input length. Worker count changes which thread computes
//! a subtree, never how partial sums are combined, so results are bit-identical
//! between a single-threaded run and any thread pool size.

/// Below this many elements a subtree is summed left to right.
const LEAF: usize = 256;

/// Subtrees larger than this are handed to the thread pool.
#[cfg(feature = "parallel")]
const FORK: usize = 1 << 14;

/// Pairwise sum of `values`.
pub fn sum(values: &[f64]) -> f64 {
    sum_by(values.len(), &|i| values[i])
}

/// Pairwise sum of `values[i]` over the indices where `mask[i]` is true.
pub fn masked_sum(values: &[f64], mask: &[bool]) -> f64 {
    assert_eq!(values.len(), mask.len(), "masked_sum: length mismatch");
    sum_by(values.len(), &|i| if mask[i] { values[i] } else { 0.0 })
}

/// Number of true entries.
pub fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&b| b).count()
}

/// Minimum and maximum of a non-empty slice, ignoring nothing (NaN propagates
/// as whatever `f64::min`/`max` return).
pub fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Pairwise sum of `term(i)` for `i in 0..len`.
pub fn sum_by<F>(len: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    tree(0, len, term)
}

fn tree<F>(start: usize, end: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = end - start;
    if len <= LEAF {
        let mut acc = 0.0;
        for i in start..end {
            acc += term(i);
        }
        return acc;
    }
    let mid = start + len / 2;
    #[cfg(feature = "parallel")]
    if len > FORK {
        let (a, b) = rayon::join(|| tree(start, mid, term), || tree(mid, end, term));
        return a + b;
    }
    tree(start, mid, term) + tree(mid, end, term)
}

/// Order-preserving map over `0..len`.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Calls `f(k, chunk)` for each consecutive `chunk_len`-sized chunk of `data`.
/// Chunks are disjoint, so workers never write the same slot.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk_len).enumerate().for_each(|(k, c)| f(k, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk_len).enumerate().for_each(|(k, c)| f(k, c));
    }
}

/// Exclusive prefix sum of the kept-flags, returning per-slot destination
/// indices and the total number kept. This is the scan half of a stream
/// compaction; the scatter happens in the caller.
pub fn compaction_offsets(keep: &[bool]) -> (Vec<usize>, usize) {
    const BLOCK: usize = 4096;
    let blocks = keep.len().div_ceil(BLOCK);
    let block_counts = map_indexed(blocks, |b| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(keep.len());
        count(&keep[lo..hi])
    });
    let mut block_starts = Vec::with_capacity(blocks);
    let mut total = 0;
    for c in block_counts {
        block_starts.push(total);
        total += c;
    }
    let mut offsets = vec![0usize; keep.len()];
    for_each_chunk_mut(&mut offsets, BLOCK, |b, out| {
        let mut next = block_starts[b];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = next;
            if keep[b * BLOCK + k] {
                next += 1;
            }
        }
    });
    (offsets, total)
}
