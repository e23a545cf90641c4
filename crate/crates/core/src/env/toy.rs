//! Small environments with known solutions, used as oracles in tests and
//! examples.

use alloc::vec;

use rand::{Rng, RngCore};

use super::one_hot;
use crate::agents::planning::TabularModel;
use crate::{ActionId, DiscreteEnvironment, Environment, Error, FeatureVector, Result, Step};

/// One state, one action, constant reward, never terminal.
#[derive(Debug, Clone)]
pub struct ConstantEnv {
    reward: f64,
}

impl ConstantEnv {
    pub fn new(reward: f64) -> Self {
        Self { reward }
    }
}

impl Environment for ConstantEnv {
    fn observation_dim(&self) -> usize {
        1
    }

    fn action_count(&self) -> usize {
        1
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> FeatureVector {
        FeatureVector::new(vec![1.0]).unwrap()
    }

    fn step(&mut self, action: ActionId, _rng: &mut dyn RngCore) -> Result<Step> {
        if action.0 != 0 {
            return Err(Error::ActionOutOfRange {
                action: action.0,
                count: 1,
            });
        }
        Ok(Step {
            observation: FeatureVector::new(vec![1.0]).unwrap(),
            reward: self.reward,
            terminal: false,
        })
    }
}

impl DiscreteEnvironment for ConstantEnv {
    fn state_count(&self) -> usize {
        1
    }

    fn state_id(&self) -> usize {
        0
    }
}

/// Any finite MDP given as a [`TabularModel`], observed one-hot.
#[derive(Debug, Clone)]
pub struct ModelEnv {
    model: TabularModel,
    start: usize,
    state: usize,
}

impl ModelEnv {
    pub fn new(model: TabularModel, start: usize) -> Self {
        Self {
            model,
            start,
            state: start,
        }
    }

    pub fn model(&self) -> &TabularModel {
        &self.model
    }

    /// One state and two actions paying 0 and 1.
    pub fn bandit() -> Self {
        let mut m = TabularModel::new(1, 2);
        m.set(0, ActionId(0), 0.0, vec![(0, 1.0)]).unwrap();
        m.set(0, ActionId(1), 1.0, vec![(0, 1.0)]).unwrap();
        Self::new(m, 0)
    }

    /// Deterministic two-state chain whose myopic choice is wrong in state 0:
    /// staying pays 1, moving pays 0 but leads to state 1 where staying pays 2.
    pub fn two_state_chain() -> Self {
        let mut m = TabularModel::new(2, 2);
        m.set(0, ActionId(0), 1.0, vec![(0, 1.0)]).unwrap();
        m.set(0, ActionId(1), 0.0, vec![(1, 1.0)]).unwrap();
        m.set(1, ActionId(0), 2.0, vec![(1, 1.0)]).unwrap();
        m.set(1, ActionId(1), 0.0, vec![(0, 1.0)]).unwrap();
        Self::new(m, 0)
    }

    /// Stochastic three-state MDP.
    pub fn three_state() -> Self {
        let mut m = TabularModel::new(3, 2);
        m.set(0, ActionId(0), 0.0, vec![(0, 0.5), (1, 0.5)])
            .unwrap();
        m.set(0, ActionId(1), 0.5, vec![(0, 1.0)]).unwrap();
        m.set(1, ActionId(0), 0.0, vec![(2, 0.7), (0, 0.3)])
            .unwrap();
        m.set(1, ActionId(1), 0.2, vec![(1, 0.6), (0, 0.4)])
            .unwrap();
        m.set(2, ActionId(0), 1.0, vec![(2, 0.8), (0, 0.2)])
            .unwrap();
        m.set(2, ActionId(1), 0.0, vec![(1, 1.0)]).unwrap();
        Self::new(m, 0)
    }
}

impl Environment for ModelEnv {
    fn observation_dim(&self) -> usize {
        self.model.states()
    }

    fn action_count(&self) -> usize {
        self.model.actions()
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> FeatureVector {
        self.state = self.start;
        one_hot(self.state, self.model.states())
    }

    fn step(&mut self, action: ActionId, rng: &mut dyn RngCore) -> Result<Step> {
        if action.0 >= self.model.actions() {
            return Err(Error::ActionOutOfRange {
                action: action.0,
                count: self.model.actions(),
            });
        }
        let succ = self.model.successors(self.state, action);
        let u = rng.random::<f64>();
        let mut acc = 0.0;
        let mut next = succ.last().map_or(self.state, |s| s.0);
        for &(s, p) in succ {
            acc += p;
            if u < acc {
                next = s;
                break;
            }
        }
        let reward = self.model.reward(self.state, action);
        self.state = next;
        Ok(Step {
            observation: one_hot(next, self.model.states()),
            reward,
            terminal: false,
        })
    }
}

impl DiscreteEnvironment for ModelEnv {
    fn state_count(&self) -> usize {
        self.model.states()
    }

    fn state_id(&self) -> usize {
        self.state
    }
}
