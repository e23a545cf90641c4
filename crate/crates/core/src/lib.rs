//! Q-learning with an incrementally boosted regression-tree approximator and
//! count-based exploration over a clustered state abstraction.
//!
//! The crate is `no_std` (it needs `alloc`). Everything random takes an
//! explicit `&mut dyn RngCore`, so a run is fully determined by its seed.
//!
//! Layout:
//!
//! * [`mdp`]: environment contract, episodes and returns.
//! * [`learners`]: CART regression trees, ridge least squares, random forests
//!   and batch gradient boosting.
//! * [`qfunc`]: Q-function approximators and their update rules.
//! * [`explore`]: epsilon-uniform and IAUU action selection.
//! * [`cluster`]: k-means and the state-collapsing function.
//! * [`env`]: Blackjack, n-Chain, the 6x6 grid world and the hill-climbing
//!   terrain simulator, plus the synthetic visual feature pipeline.
//! * [`agents`]: full training loops, tabular Q-learning and RMax.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agents;
pub mod cluster;
pub mod env;
mod error;
pub mod explore;
pub mod learners;
mod math;
pub mod mdp;
pub mod qfunc;

pub use error::{Error, Result};
pub use mdp::{
    discounted_return, run_episode, ActionId, ActionSelector, Discount, DiscreteEnvironment,
    Environment, EpisodeTrace, FeatureVector, Step, Transition,
};

/// Seeded generator used throughout the crate for derived streams.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds a [`SeededRng`] from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
