use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use super::EvalError;

/// A partition of `0..n` into `k` folds whose sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    /// Each fold's indices, ascending.
    pub folds: Vec<Vec<usize>>,
}

/// Shuffles `0..n` with a Fisher-Yates pass driven by SplitMix64 (state
/// initialised to `seed`; swap partner `next_u64() % (i + 1)` for `i` from
/// `n - 1` down to 1), then deals positions round-robin into `k` folds.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    if k < 1 || k > n {
        return Err(EvalError::InvalidFolds { n, k });
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldAssignment { k, seed, folds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_stream() {
        // First outputs of splitmix64 with state 0 (reference C implementation).
        let mut rng = SplitMix64::seed_from_u64(0);
        assert_eq!(rng.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(rng.next_u64(), 0x6e789e6aa1b965f4);
    }

    #[test]
    fn eighteen_into_five() {
        let f = kfold_split(18, 5, 42).unwrap();
        let mut sizes: Vec<usize> = f.folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4, 4, 4]);
        let mut all: Vec<usize> = f.folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..18).collect::<Vec<_>>());
    }

    #[test]
    fn seeded_and_stable() {
        assert_eq!(kfold_split(18, 5, 7).unwrap(), kfold_split(18, 5, 7).unwrap());
        assert_ne!(kfold_split(18, 5, 7).unwrap().folds, kfold_split(18, 5, 8).unwrap().folds);
    }

    #[test]
    fn rejects_bad_k() {
        assert!(matches!(kfold_split(3, 4, 0), Err(EvalError::InvalidFolds { n: 3, k: 4 })));
        assert!(kfold_split(3, 0, 0).is_err());
        assert_eq!(kfold_split(1, 1, 0).unwrap().folds, vec![vec![0]]);
    }
}
