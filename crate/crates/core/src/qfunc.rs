//! Q-function approximators and their update rules.
//!
//! Function approximators see a state-action pair as the state features
//! followed by a one-hot encoding of the action (see [`StateAction`]).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::learners::{
    fit_boosted, fit_forest, fit_linear, fit_tree, BoostedEnsemble, Dataset, FeatureSource,
    ForestModel, LinearModel, RegressionTree, TreeParams,
};
use crate::math::argmax;
use crate::{ActionId, EpisodeTrace, Error, Result};

/// Borrowed view of `state ++ one_hot(action)`.
#[derive(Debug, Clone, Copy)]
pub struct StateAction<'a> {
    pub state: &'a [f64],
    pub action: usize,
    pub actions: usize,
}

impl FeatureSource for StateAction<'_> {
    #[inline]
    fn dim(&self) -> usize {
        self.state.len() + self.actions
    }

    #[inline]
    fn feature(&self, index: usize) -> f64 {
        let d = self.state.len();
        if index < d {
            self.state[index]
        } else if index - d == self.action {
            1.0
        } else {
            0.0
        }
    }
}

/// Materialized `state ++ one_hot(action)`.
pub fn encode(state: &[f64], action: ActionId, actions: usize) -> Vec<f64> {
    let sa = StateAction {
        state,
        action: action.0,
        actions,
    };
    (0..sa.dim()).map(|i| sa.feature(i)).collect()
}

/// Per-episode schedules `x_t = x_0 / (1 + decay * t)` for exploration and
/// learning rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningSchedule {
    pub epsilon0: f64,
    pub alpha0: f64,
    pub decay: f64,
}

impl Default for LearningSchedule {
    fn default() -> Self {
        Self {
            epsilon0: 0.4,
            alpha0: 0.15,
            decay: 0.04,
        }
    }
}

impl LearningSchedule {
    pub fn epsilon(&self, episode: usize) -> f64 {
        self.epsilon0 / (1.0 + self.decay * episode as f64)
    }

    pub fn alpha(&self, episode: usize) -> f64 {
        self.alpha0 / (1.0 + self.decay * episode as f64)
    }
}

/// Action-value function over continuous states.
pub trait QFunction {
    fn state_dim(&self) -> usize;

    fn action_count(&self) -> usize;

    /// Value without dimension checks; `action` must be in range.
    fn value_unchecked(&self, state: &[f64], action: usize) -> f64;

    fn q_value(&self, state: &[f64], action: ActionId) -> Result<f64> {
        self.check(state)?;
        if action.0 >= self.action_count() {
            return Err(Error::ActionOutOfRange {
                action: action.0,
                count: self.action_count(),
            });
        }
        Ok(self.value_unchecked(state, action.0))
    }

    fn action_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.check(state)?;
        Ok((0..self.action_count())
            .map(|a| self.value_unchecked(state, a))
            .collect())
    }

    fn max_value(&self, state: &[f64]) -> Result<f64> {
        Ok(self
            .action_values(state)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max))
    }

    fn check(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.state_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.state_dim(),
                found: state.len(),
            });
        }
        Ok(())
    }
}

/// `argmax_a Q(s, a)`, ties to the lowest action index.
pub fn greedy_action<Q: QFunction + ?Sized>(q: &Q, state: &[f64]) -> Result<ActionId> {
    Ok(ActionId(argmax(&q.action_values(state)?)))
}

/// Additive ensemble `Q(s,a) = sum_t alpha_t h_t(s ++ one_hot(a))`.
///
/// The empty ensemble is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedQ {
    state_dim: usize,
    actions: usize,
    stages: Vec<(f64, RegressionTree)>,
}

impl BoostedQ {
    pub fn new(state_dim: usize, actions: usize) -> Self {
        Self {
            state_dim,
            actions,
            stages: Vec::new(),
        }
    }

    pub fn stages(&self) -> &[(f64, RegressionTree)] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn push_stage(&mut self, weight: f64, tree: RegressionTree) -> Result<()> {
        let expected = self.state_dim + self.actions;
        if tree.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: tree.dim(),
            });
        }
        self.stages.push((weight, tree));
        Ok(())
    }

    pub fn pop_stage(&mut self) -> Option<(f64, RegressionTree)> {
        self.stages.pop()
    }
}

impl QFunction for BoostedQ {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn action_count(&self) -> usize {
        self.actions
    }

    fn value_unchecked(&self, state: &[f64], action: usize) -> f64 {
        let x = StateAction {
            state,
            action,
            actions: self.actions,
        };
        self.stages
            .iter()
            .map(|(w, h)| w * h.predict_unchecked(&x))
            .sum()
    }
}

/// Linear model over `state ++ one_hot(action)` plus a bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearQ {
    state_dim: usize,
    actions: usize,
    model: LinearModel,
}

impl LinearQ {
    pub fn new(state_dim: usize, actions: usize) -> Self {
        Self {
            state_dim,
            actions,
            model: LinearModel::zeros(state_dim + actions),
        }
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }
}

impl QFunction for LinearQ {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn action_count(&self) -> usize {
        self.actions
    }

    fn value_unchecked(&self, state: &[f64], action: usize) -> f64 {
        self.model.predict_unchecked(&StateAction {
            state,
            action,
            actions: self.actions,
        })
    }
}

/// One residual-regression step for [`LinearQ`]: fits ridge least squares to
/// the TD residuals of `trace` and adds the fit with weight `alpha`.
pub fn linear_step(
    q: &mut LinearQ,
    trace: &EpisodeTrace,
    alpha: f64,
    gamma: f64,
    ridge: f64,
) -> Result<()> {
    let data = residual_targets(trace, &*q, gamma)?;
    let h = fit_linear(&data, ridge)?;
    q.model.add_scaled(&h, alpha)
}

/// TD residual regression set for one episode.
///
/// One row per transition: features `s_i ++ one_hot(a_i)`, target
/// `r_i + gamma * max_a' Q(s_{i+1}, a') - Q(s_i, a_i)`, with the look-ahead
/// term dropped on terminal transitions.
pub fn residual_targets<Q: QFunction + ?Sized>(
    trace: &EpisodeTrace,
    q: &Q,
    gamma: f64,
) -> Result<Dataset> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let actions = q.action_count();
    let mut data = Dataset::new(q.state_dim() + actions);
    for t in trace.transitions() {
        let future = if t.terminal {
            0.0
        } else {
            q.max_value(&t.next_state)?
        };
        let target = t.reward + gamma * future - q.q_value(&t.state, t.action)?;
        data.push(
            &StateAction {
                state: &t.state,
                action: t.action.0,
                actions,
            },
            target,
        )?;
    }
    Ok(data)
}

/// Fits a tree to the episode's TD residuals and appends it with weight `alpha`.
pub fn boost_step(
    q: &mut BoostedQ,
    trace: &EpisodeTrace,
    alpha: f64,
    gamma: f64,
    params: TreeParams,
) -> Result<()> {
    let data = residual_targets(trace, &*q, gamma)?;
    let tree = fit_tree(&data, params)?;
    q.push_stage(alpha, tree)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchKind {
    /// Stagewise gradient boosting from the target mean.
    Boosted,
    /// Bootstrap-aggregated trees.
    Forest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchConfig {
    pub kind: BatchKind,
    pub n_trees: usize,
    pub tree: TreeParams,
    /// Shrinkage for [`BatchKind::Boosted`].
    pub shrinkage: f64,
    /// Episodes between refits.
    pub period: usize,
    /// Number of most recent episodes used by a refit.
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum BatchModel {
    Boosted(BoostedEnsemble),
    Forest(ForestModel),
}

/// Tree ensemble retrained from scratch on a window of recent episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchQ {
    state_dim: usize,
    actions: usize,
    config: BatchConfig,
    model: Option<BatchModel>,
    recent: VecDeque<EpisodeTrace>,
    episodes_seen: usize,
}

impl BatchQ {
    pub fn new(state_dim: usize, actions: usize, config: BatchConfig) -> Self {
        Self {
            state_dim,
            actions,
            config,
            model: None,
            recent: VecDeque::new(),
            episodes_seen: 0,
        }
    }

    pub fn config(&self) -> &BatchConfig {
        &self.config
    }

    pub fn is_trained(&self) -> bool {
        self.model.is_some()
    }

    /// Records an episode and refits when the retrain period comes due.
    /// Returns whether a refit happened.
    pub fn observe(
        &mut self,
        trace: EpisodeTrace,
        gamma: f64,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        self.recent.push_back(trace);
        while self.recent.len() > self.config.window.max(1) {
            self.recent.pop_front();
        }
        self.episodes_seen += 1;
        if self.config.period == 0 || self.episodes_seen % self.config.period != 0 {
            return Ok(false);
        }
        let window: Vec<EpisodeTrace> = self.recent.iter().cloned().collect();
        batch_refit(self, &window, gamma, rng)?;
        Ok(true)
    }
}

impl QFunction for BatchQ {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn action_count(&self) -> usize {
        self.actions
    }

    fn value_unchecked(&self, state: &[f64], action: usize) -> f64 {
        let x = StateAction {
            state,
            action,
            actions: self.actions,
        };
        match &self.model {
            None => 0.0,
            Some(BatchModel::Boosted(m)) => m.predict_unchecked(&x),
            Some(BatchModel::Forest(m)) => m.predict_unchecked(&x),
        }
    }
}

/// One fitted-Q sweep: discards the current model and fits a fresh ensemble
/// to `r + gamma * max_a' Q_old(s', a')` over every transition in `window`,
/// where `Q_old` is the model before the refit (zero on terminal steps).
pub fn batch_refit(
    q: &mut BatchQ,
    window: &[EpisodeTrace],
    gamma: f64,
    rng: &mut dyn RngCore,
) -> Result<()> {
    if window.iter().all(EpisodeTrace::is_empty) {
        return Err(Error::EmptyWindow);
    }
    let actions = q.actions;
    let mut data = Dataset::new(q.state_dim + actions);
    for trace in window {
        for t in trace.transitions() {
            let future = if t.terminal {
                0.0
            } else {
                q.max_value(&t.next_state)?
            };
            data.push(
                &StateAction {
                    state: &t.state,
                    action: t.action.0,
                    actions,
                },
                t.reward + gamma * future,
            )?;
        }
    }
    let cfg = q.config;
    q.model = Some(match cfg.kind {
        BatchKind::Boosted => {
            BatchModel::Boosted(fit_boosted(&data, cfg.n_trees, cfg.shrinkage, cfg.tree)?)
        }
        BatchKind::Forest => {
            BatchModel::Forest(fit_forest(&data, cfg.n_trees, cfg.tree, true, rng)?)
        }
    });
    Ok(())
}

/// Dense `Q(s, a)` table over discrete states; unvisited entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularQ {
    states: usize,
    actions: usize,
    table: Vec<f64>,
}

impl TabularQ {
    pub fn new(states: usize, actions: usize) -> Self {
        Self {
            states,
            actions,
            table: vec![0.0; states * actions],
        }
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    #[inline]
    pub fn get(&self, state: usize, action: ActionId) -> f64 {
        self.table[state * self.actions + action.0]
    }

    pub fn set(&mut self, state: usize, action: ActionId, value: f64) {
        self.table[state * self.actions + action.0] = value;
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.table[state * self.actions..(state + 1) * self.actions]
    }

    pub fn max_value(&self, state: usize) -> f64 {
        self.row(state)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn greedy_action(&self, state: usize) -> ActionId {
        ActionId(argmax(self.row(state)))
    }
}

/// `Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))`; the look-ahead
/// is dropped when `terminal`.
#[allow(clippy::too_many_arguments)]
pub fn tabular_update(
    q: &mut TabularQ,
    state: usize,
    action: ActionId,
    reward: f64,
    next_state: usize,
    terminal: bool,
    alpha: f64,
    gamma: f64,
) {
    let future = if terminal {
        0.0
    } else {
        q.max_value(next_state)
    };
    let old = q.get(state, action);
    q.set(state, action, old + alpha * (reward + gamma * future - old));
}
