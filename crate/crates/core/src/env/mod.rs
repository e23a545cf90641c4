//! Benchmark environments.

pub mod blackjack;
pub mod gridworld;
pub mod nchain;
pub mod terrain;
pub mod toy;
pub mod vision;

use alloc::vec;

use crate::FeatureVector;

/// One-hot observation of `index` among `n` states.
pub(crate) fn one_hot(index: usize, n: usize) -> FeatureVector {
    let mut v = vec![0.0; n];
    v[index] = 1.0;
    FeatureVector::new(v).expect("one-hot vectors are finite")
}
