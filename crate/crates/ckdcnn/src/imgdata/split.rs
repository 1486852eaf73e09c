//! Seeded uniform train/test and train/validation splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledSet;
use crate::error::{Error, Result};

/// Default random state for the train/validation split.
pub const DEFAULT_SPLIT_SEED: u64 = 42;

/// An exact, disjoint partition of a labeled set.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: LabeledSet,
    pub held_out: LabeledSet,
    pub seed: u64,
    pub held_fraction: f64,
}

/// Shuffles `0..n` with the seeded generator and carves off
/// `ceil(n * held_fraction)` indices as the held-out side. Both sides are
/// returned in ascending index order.
pub fn split_indices(n: usize, held_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(held_fraction > 0.0 && held_fraction < 1.0) {
        return Err(Error::Config(format!(
            "split fraction must lie in (0,1), got {held_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::Data(format!("cannot split a set of {n} samples")));
    }
    let held = (n as f64 * held_fraction).ceil() as usize;
    if held >= n {
        return Err(Error::Config(format!(
            "fraction {held_fraction} leaves no training samples for n={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut held_idx = order[..held].to_vec();
    let mut train_idx = order[held..].to_vec();
    held_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((train_idx, held_idx))
}

fn split_set(data: &LabeledSet, held_fraction: f64, seed: u64) -> Result<SplitPair> {
    let (train_idx, held_idx) = split_indices(data.len(), held_fraction, seed)?;
    Ok(SplitPair {
        train: data.gather(&train_idx)?,
        held_out: data.gather(&held_idx)?,
        seed,
        held_fraction,
    })
}

/// Train/test split; the held-out side receives `ceil(n * test_fraction)`
/// samples.
pub fn split_train_test(data: &LabeledSet, test_fraction: f64, seed: u64) -> Result<SplitPair> {
    split_set(data, test_fraction, seed)
}

/// Train/validation split, conventionally run with fraction 0.1 and
/// [`DEFAULT_SPLIT_SEED`].
pub fn split_train_val(data: &LabeledSet, val_fraction: f64, seed: u64) -> Result<SplitPair> {
    split_set(data, val_fraction, seed)
}
