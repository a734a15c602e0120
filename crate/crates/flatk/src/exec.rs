//! Execution strategy: data-parallel inner loops with a sequential fallback.
//!
//! With the `parallel` feature (default) the `Rayon` mode fans work out over
//! the global rayon pool; without it every mode degrades to sequential, so the
//! crate builds and behaves identically on single-threaded targets.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Rayon,
    Sequential,
}

/// Maps `f` over `0..n` and collects results in index order. Deterministic in
/// both modes.
pub fn map_indexed<U, F>(mode: Parallelism, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == Parallelism::Rayon {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Compensated (Kahan) sum in a fixed order.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

const BLOCK: usize = 4096;

/// Sum of `f(i)` for `i in 0..n` with block-wise compensated accumulation.
///
/// Blocks are summed independently (in parallel when enabled) and then folded
/// in index order, so the result is identical for any thread count.
pub fn block_sum<F>(mode: Parallelism, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let partial = map_indexed(mode, blocks, |b| {
        let lo = b * BLOCK;
        let hi = ((b + 1) * BLOCK).min(n);
        kahan_sum((lo..hi).map(&f))
    });
    kahan_sum(partial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_sum_matches_sequential_kahan() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / 3.0;
        let a = block_sum(Parallelism::Rayon, 50_000, f);
        let b = block_sum(Parallelism::Sequential, 50_000, f);
        assert_eq!(a, b);
        let plain = kahan_sum((0..50_000).map(f));
        assert!((a - plain).abs() < 1e-9);
    }
}
