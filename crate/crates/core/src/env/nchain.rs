//! The n-Chain task.
//!
//! States `0..n`. *Forward* moves from `i` to `i + 1` (staying at `n - 1` at
//! the end) and pays 100 when the move lands on `n - 1`, 0 otherwise.
//! *Return* goes back to state 0 and pays 2. With probability `slip` an action
//! has the other action's effect. The task never terminates.

use rand::{Rng, RngCore};

use super::one_hot;
use crate::agents::planning::TabularModel;
use crate::{ActionId, DiscreteEnvironment, Environment, Error, FeatureVector, Result, Step};

/// Return is action 0, so a zero-initialised greedy learner starts by returning.
pub const RETURN: ActionId = ActionId(0);
pub const FORWARD: ActionId = ActionId(1);

pub const DEFAULT_SLIP: f64 = 0.2;
pub const END_REWARD: f64 = 100.0;
pub const RETURN_REWARD: f64 = 2.0;

/// Deterministic part of a transition: `(next_position, reward)` given
/// whether the action slipped.
pub fn nchain_step(
    position: usize,
    action: ActionId,
    slipped: bool,
    n: usize,
) -> Result<(usize, f64)> {
    if action.0 > 1 {
        return Err(Error::ActionOutOfRange {
            action: action.0,
            count: 2,
        });
    }
    let forward = (action == FORWARD) != slipped;
    Ok(if forward {
        let next = (position + 1).min(n - 1);
        (next, if next == n - 1 { END_REWARD } else { 0.0 })
    } else {
        (0, RETURN_REWARD)
    })
}

#[derive(Debug, Clone)]
pub struct NChain {
    n: usize,
    slip: f64,
    position: usize,
    slips: u64,
    steps: u64,
}

impl NChain {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "a chain needs at least two states");
        Self {
            n,
            slip: DEFAULT_SLIP,
            position: 0,
            slips: 0,
            steps: 0,
        }
    }

    pub fn with_slip(mut self, slip: f64) -> Self {
        self.slip = slip;
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn slip(&self) -> f64 {
        self.slip
    }

    pub fn position(&self) -> usize {
        self.position
    }

    /// `(slipped steps, total steps)` since construction.
    pub fn slip_record(&self) -> (u64, u64) {
        (self.slips, self.steps)
    }

    pub fn observation_for(&self, position: usize) -> FeatureVector {
        one_hot(position, self.n)
    }

    /// Exact transition model (expected rewards).
    pub fn model(&self) -> TabularModel {
        let mut m = TabularModel::new(self.n, 2);
        for s in 0..self.n {
            for a in [FORWARD, RETURN] {
                let (intended, r_int) = nchain_step(s, a, false, self.n).unwrap();
                let (slipped, r_slip) = nchain_step(s, a, true, self.n).unwrap();
                let reward = (1.0 - self.slip) * r_int + self.slip * r_slip;
                let mut succ = if intended == slipped {
                    alloc::vec![(intended, 1.0)]
                } else {
                    alloc::vec![(intended, 1.0 - self.slip), (slipped, self.slip)]
                };
                succ.retain(|&(_, p)| p > 0.0);
                m.set(s, a, reward, succ).unwrap();
            }
        }
        m
    }
}

impl Environment for NChain {
    fn observation_dim(&self) -> usize {
        self.n
    }

    fn action_count(&self) -> usize {
        2
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> FeatureVector {
        self.position = 0;
        self.observation_for(0)
    }

    fn step(&mut self, action: ActionId, rng: &mut dyn RngCore) -> Result<Step> {
        let slipped = rng.random::<f64>() < self.slip;
        let (next, reward) = nchain_step(self.position, action, slipped, self.n)?;
        self.steps += 1;
        self.slips += u64::from(slipped);
        self.position = next;
        Ok(Step {
            observation: self.observation_for(next),
            reward,
            terminal: false,
        })
    }
}

impl DiscreteEnvironment for NChain {
    fn state_count(&self) -> usize {
        self.n
    }

    fn state_id(&self) -> usize {
        self.position
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_into_last_state_pays() {
        assert_eq!(nchain_step(3, FORWARD, false, 5).unwrap(), (4, 100.0));
        assert_eq!(nchain_step(4, FORWARD, false, 5).unwrap(), (4, 100.0));
        assert_eq!(nchain_step(1, FORWARD, false, 5).unwrap(), (2, 0.0));
    }

    #[test]
    fn return_pays_two() {
        assert_eq!(nchain_step(2, RETURN, false, 5).unwrap(), (0, 2.0));
    }

    #[test]
    fn slip_swaps_effects() {
        assert_eq!(nchain_step(2, FORWARD, true, 5).unwrap(), (0, 2.0));
        assert_eq!(nchain_step(3, RETURN, true, 5).unwrap(), (4, 100.0));
    }

    #[test]
    fn model_rows_are_distributions() {
        let m = NChain::new(5).model();
        assert!((m.reward(0, FORWARD) - 0.4).abs() < 1e-12);
        assert!((m.reward(3, FORWARD) - 80.4).abs() < 1e-12);
    }
}
