//! Execution policy for the data-parallel loops.
//!
//! Work is always cut into the same shards whatever the policy, each shard
//! owns an RNG seeded from `(seed, shard)`, and partial results are combined
//! in shard order. Sequential and parallel runs therefore agree bit for bit.

/// Points per Monte-Carlo shard.
pub const SHARD_SIZE: usize = 16_384;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is on, otherwise falls back to sequential.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `f(0), f(1), ..., f(n-1)` in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Split `n` items into `(start, len)` shards of at most [`SHARD_SIZE`].
pub fn shards(n: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(SHARD_SIZE))
        .map(|i| {
            let start = i * SHARD_SIZE;
            (start, SHARD_SIZE.min(n - start))
        })
        .collect()
}

/// SplitMix64 mix of master seed and shard index.
pub fn shard_seed(seed: u64, shard: u64) -> u64 {
    let mut z = seed ^ shard.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
