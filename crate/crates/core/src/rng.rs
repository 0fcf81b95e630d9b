//! Seed plumbing for reproducible, thread-count-independent Monte Carlo.
//!
//! Work of size `n` is split into fixed chunks of [`CHUNK`] items. Chunk `k`
//! draws from a ChaCha8 generator keyed by the run seed with stream id `k`, so
//! the output only depends on `(seed, n)` and never on how rayon schedules the
//! chunks. Results are concatenated in chunk order.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// Generator for one partition of a seeded computation.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for a labelled sub-computation (`tag`) and index.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let tag_hash = tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    });
    mix(mix(seed ^ tag_hash) ^ index)
}

/// Runs `f` on every chunk of `0..n` in parallel, each with its own stream,
/// and returns the per-chunk results in chunk order.
pub fn map_chunks<R, F>(n: usize, seed: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(&mut ChaCha8Rng, Range<usize>) -> R + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let start = k * CHUNK;
            let end = (start + CHUNK).min(n);
            let mut rng = stream_rng(seed, k as u64);
            f(&mut rng, start..end)
        })
        .collect()
}
