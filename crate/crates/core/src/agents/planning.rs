//! Known-model planning for small discrete MDPs.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::abs;
use crate::qfunc::TabularQ;
use crate::{ActionId, Error, Result};

/// Explicit finite MDP: expected rewards and successor distributions per
/// `(state, action)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularModel {
    states: usize,
    actions: usize,
    rewards: Vec<f64>,
    successors: Vec<Vec<(usize, f64)>>,
}

impl TabularModel {
    pub fn new(states: usize, actions: usize) -> Self {
        Self {
            states,
            actions,
            rewards: vec![0.0; states * actions],
            successors: vec![Vec::new(); states * actions],
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    /// Sets the expected reward and successor distribution of `(s, a)`.
    pub fn set(
        &mut self,
        state: usize,
        action: ActionId,
        reward: f64,
        successors: Vec<(usize, f64)>,
    ) -> Result<()> {
        if state >= self.states || action.0 >= self.actions {
            return Err(Error::InvalidParameter("state or action out of range"));
        }
        let total: f64 = successors.iter().map(|s| s.1).sum();
        if successors.iter().any(|&(s, p)| s >= self.states || p < 0.0) || abs(total - 1.0) > 1e-9 {
            return Err(Error::InvalidParameter(
                "successor distribution must be a probability vector",
            ));
        }
        let i = state * self.actions + action.0;
        self.rewards[i] = reward;
        self.successors[i] = successors;
        Ok(())
    }

    pub fn reward(&self, state: usize, action: ActionId) -> f64 {
        self.rewards[state * self.actions + action.0]
    }

    pub fn successors(&self, state: usize, action: ActionId) -> &[(usize, f64)] {
        &self.successors[state * self.actions + action.0]
    }
}

/// Iterates the Bellman optimality operator until the largest change is
/// below `tolerance`.
pub fn value_iteration(model: &TabularModel, gamma: f64, tolerance: f64) -> TabularQ {
    let mut q = TabularQ::new(model.states, model.actions);
    let mut values = vec![0.0; model.states];
    loop {
        let mut delta: f64 = 0.0;
        for s in 0..model.states {
            for a in 0..model.actions {
                let a = ActionId(a);
                let future: f64 = model
                    .successors(s, a)
                    .iter()
                    .map(|&(n, p)| p * values[n])
                    .sum();
                let v = model.reward(s, a) + gamma * future;
                delta = delta.max(abs(v - q.get(s, a)));
                q.set(s, a, v);
            }
        }
        for (s, v) in values.iter_mut().enumerate() {
            *v = q.max_value(s);
        }
        if delta < tolerance {
            return q;
        }
    }
}
