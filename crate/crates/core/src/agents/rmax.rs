//! RMax: model-based exploration by optimism.
//!
//! A pair `(s, a)` becomes known after `known_threshold` visits; its model is
//! then frozen at the empirical mean reward and successor frequencies. Unknown
//! pairs are modelled as self-loops paying `r_max`, which makes them look
//! better than anything real. The agent plans by value iteration whenever a
//! pair becomes known and otherwise acts greedily.

use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use super::planning::{value_iteration, TabularModel};
use super::TrainingRun;
use crate::qfunc::TabularQ;
use crate::{ActionId, DiscreteEnvironment, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMaxConfig {
    pub known_threshold: u32,
    pub r_max: f64,
    pub gamma: f64,
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for RMaxConfig {
    fn default() -> Self {
        Self {
            known_threshold: 5,
            r_max: 100.0,
            gamma: 0.95,
            tolerance: 1e-6,
            max_steps: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RMaxAgent {
    states: usize,
    actions: usize,
    cfg: RMaxConfig,
    visits: Vec<u32>,
    reward_sums: Vec<f64>,
    successor_counts: Vec<Vec<u32>>,
    q: TabularQ,
    replans: usize,
}

impl RMaxAgent {
    pub fn new(states: usize, actions: usize, cfg: RMaxConfig) -> Result<Self> {
        if cfg.known_threshold == 0 {
            return Err(Error::InvalidParameter(
                "known_threshold must be at least 1",
            ));
        }
        if !(cfg.gamma >= 0.0 && cfg.gamma < 1.0) {
            return Err(Error::InvalidParameter("gamma must lie in [0, 1)"));
        }
        let pairs = states * actions;
        let mut agent = Self {
            states,
            actions,
            cfg,
            visits: vec![0; pairs],
            reward_sums: vec![0.0; pairs],
            successor_counts: vec![vec![0; states]; pairs],
            q: TabularQ::new(states, actions),
            replans: 0,
        };
        agent.plan();
        Ok(agent)
    }

    pub fn is_known(&self, state: usize, action: ActionId) -> bool {
        self.visits[state * self.actions + action.0] >= self.cfg.known_threshold
    }

    pub fn known_pairs(&self) -> usize {
        self.visits
            .iter()
            .filter(|&&v| v >= self.cfg.known_threshold)
            .count()
    }

    pub fn all_known(&self) -> bool {
        self.known_pairs() == self.visits.len()
    }

    pub fn q(&self) -> &TabularQ {
        &self.q
    }

    /// Number of value-iteration runs so far, the initial one included.
    pub fn replans(&self) -> usize {
        self.replans
    }

    pub fn act(&self, state: usize) -> ActionId {
        self.q.greedy_action(state)
    }

    /// Empirical model for known pairs, optimistic self-loops elsewhere.
    pub fn optimistic_model(&self) -> TabularModel {
        let mut model = TabularModel::new(self.states, self.actions);
        for s in 0..self.states {
            for a in 0..self.actions {
                let i = s * self.actions + a;
                let n = self.visits[i];
                let (reward, succ) = if n >= self.cfg.known_threshold {
                    let total = f64::from(n);
                    let succ = self.successor_counts[i]
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c > 0)
                        .map(|(next, &c)| (next, f64::from(c) / total))
                        .collect();
                    (self.reward_sums[i] / total, succ)
                } else {
                    (self.cfg.r_max, vec![(s, 1.0)])
                };
                model
                    .set(s, ActionId(a), reward, succ)
                    .expect("counts form a distribution");
            }
        }
        model
    }

    fn plan(&mut self) {
        self.q = value_iteration(&self.optimistic_model(), self.cfg.gamma, self.cfg.tolerance);
        self.replans += 1;
    }

    /// Records a transition; returns whether it made a pair known (and so
    /// triggered a replan). Known pairs are no longer updated.
    pub fn observe(
        &mut self,
        state: usize,
        action: ActionId,
        reward: f64,
        next_state: usize,
    ) -> bool {
        let i = state * self.actions + action.0;
        if self.visits[i] >= self.cfg.known_threshold {
            return false;
        }
        self.visits[i] += 1;
        self.reward_sums[i] += reward;
        self.successor_counts[i][next_state] += 1;
        if self.visits[i] == self.cfg.known_threshold {
            self.plan();
            return true;
        }
        false
    }
}

/// Runs RMax for `episodes` episodes of at most `cfg.max_steps` steps on a
/// continuing discrete task. The model persists across episodes.
pub fn train_rmax<E: DiscreteEnvironment + ?Sized>(
    env: &mut E,
    cfg: &RMaxConfig,
    episodes: usize,
    rng: &mut dyn RngCore,
) -> Result<TrainingRun<RMaxAgent>> {
    if cfg.max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1"));
    }
    let mut agent = RMaxAgent::new(env.state_count(), env.action_count(), *cfg)?;
    let mut rewards = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        env.reset(rng);
        let mut total = 0.0;
        for _ in 0..cfg.max_steps {
            let s = env.state_id();
            let a = agent.act(s);
            let step = env.step(a, rng)?;
            if step.terminal {
                return Err(Error::InvalidParameter("RMax expects a continuing task"));
            }
            total += step.reward;
            agent.observe(s, a, step.reward, env.state_id());
        }
        rewards.push(total);
    }
    Ok(TrainingRun {
        model: agent,
        rewards,
    })
}
