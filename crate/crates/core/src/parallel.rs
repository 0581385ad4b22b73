//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel map here writes each output slot from exactly one closure
//! call, so results are bitwise identical to the serial path. When the
//! `parallel` feature is disabled, [`Execution::Parallel`] silently runs
//! serially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this build can actually run work on the rayon pool.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Evaluates `f(0..n)` and collects the results in index order.
pub fn map_indices<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Applies `f` to consecutive `chunk`-sized blocks of `data` in place.
pub fn for_each_chunk<T, F>(data: &mut [T], chunk: usize, exec: Execution, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, block)| f(i, block));
        }
        _ => data
            .chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, block)| f(i, block)),
    }
}

/// Pairwise (cascade) summation. The split points depend only on the length,
/// so the result is independent of how the inputs were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_and_parallel_maps_agree() {
        let f = |i: usize| ((i as f64) * 0.37).sin();
        let a = map_indices(1000, Execution::Serial, f);
        let b = map_indices(1000, Execution::Parallel, f);
        assert_eq!(a, b);
    }

    #[test]
    fn pairwise_sum_matches_naive_for_small_inputs() {
        let v: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 45.0);
        let big: Vec<f64> = (0..1000).map(|_| 0.1).collect();
        assert!((pairwise_sum(&big) - 100.0).abs() < 1e-12);
    }
}
