//! Training loops: GEQL, the function-approximation baselines, tabular
//! Q-learning and RMax.
//!
//! Episodes are numbered from 1; the exploration and learning rates for
//! episode `t` come from [`LearningSchedule`]. Every loop returns the final
//! model together with the undiscounted reward of each episode.

use alloc::vec::Vec;

use rand::RngCore;

use crate::cluster::StateCollapser;
use crate::explore::{
    epsilon_uniform_choose, epsilon_uniform_select, iauu_choose, select_action, CountTable,
    IauuConfig,
};
use crate::learners::{TreeParams, DEFAULT_RIDGE};
use crate::qfunc::{
    boost_step, linear_step, tabular_update, BatchConfig, BatchKind, BatchQ, BoostedQ,
    LearningSchedule, LinearQ, QFunction, TabularQ,
};
use crate::{
    run_episode, ActionId, ActionSelector, DiscreteEnvironment, Environment, EpisodeTrace, Error,
    FeatureVector, Result,
};

pub mod planning;
mod rmax;

pub use rmax::{train_rmax, RMaxAgent, RMaxConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApproximatorKind {
    /// One tree per episode fitted to TD residuals (GEQL's approximator).
    Booster,
    Linear,
    BatchBoost,
    Forest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exploration {
    Uniform,
    Iauu(IauuConfig),
}

/// Whether IAUU counts carry over between episodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountPersistence {
    #[default]
    Persist,
    Reset,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig {
    pub schedule: LearningSchedule,
    pub gamma: f64,
    pub episodes: usize,
    pub max_steps: usize,
    pub exploration: Exploration,
    pub counts: CountPersistence,
    pub tree: TreeParams,
    pub batch_trees: usize,
    pub batch_shrinkage: f64,
    pub batch_period: usize,
    pub batch_window: usize,
    pub ridge: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            schedule: LearningSchedule::default(),
            gamma: 0.95,
            episodes: 100,
            max_steps: 80,
            exploration: Exploration::Iauu(IauuConfig::default()),
            counts: CountPersistence::Persist,
            tree: TreeParams::default(),
            batch_trees: 500,
            batch_shrinkage: 0.1,
            batch_period: 50,
            batch_window: 50,
            ridge: DEFAULT_RIDGE,
        }
    }
}

impl AgentConfig {
    pub fn batch_config(&self, kind: BatchKind) -> BatchConfig {
        BatchConfig {
            kind,
            n_trees: self.batch_trees,
            tree: self.tree,
            shrinkage: self.batch_shrinkage,
            period: self.batch_period,
            window: self.batch_window,
        }
    }

    /// IAUU settings with the uniform-mix horizon bound to the step cap.
    pub fn iauu(&self) -> Option<IauuConfig> {
        match self.exploration {
            Exploration::Uniform => None,
            Exploration::Iauu(c) => Some(IauuConfig {
                horizon: self.max_steps,
                ..c
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be at least 1"));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter("gamma must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Per-episode rewards and the final model of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun<M> {
    pub model: M,
    pub rewards: Vec<f64>,
}

/// Any of the function approximators the generic loop can train.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionQ {
    Booster(BoostedQ),
    Linear(LinearQ),
    Batch(BatchQ),
}

impl FunctionQ {
    pub fn new(
        kind: ApproximatorKind,
        state_dim: usize,
        actions: usize,
        cfg: &AgentConfig,
    ) -> Self {
        match kind {
            ApproximatorKind::Booster => FunctionQ::Booster(BoostedQ::new(state_dim, actions)),
            ApproximatorKind::Linear => FunctionQ::Linear(LinearQ::new(state_dim, actions)),
            ApproximatorKind::BatchBoost => FunctionQ::Batch(BatchQ::new(
                state_dim,
                actions,
                cfg.batch_config(BatchKind::Boosted),
            )),
            ApproximatorKind::Forest => FunctionQ::Batch(BatchQ::new(
                state_dim,
                actions,
                cfg.batch_config(BatchKind::Forest),
            )),
        }
    }

    fn learn(
        &mut self,
        trace: EpisodeTrace,
        alpha: f64,
        cfg: &AgentConfig,
        rng: &mut dyn RngCore,
    ) -> Result<()> {
        match self {
            FunctionQ::Booster(q) => boost_step(q, &trace, alpha, cfg.gamma, cfg.tree),
            FunctionQ::Linear(q) => linear_step(q, &trace, alpha, cfg.gamma, cfg.ridge),
            FunctionQ::Batch(q) => q.observe(trace, cfg.gamma, rng).map(drop),
        }
    }

    fn inner(&self) -> &dyn QFunction {
        match self {
            FunctionQ::Booster(q) => q,
            FunctionQ::Linear(q) => q,
            FunctionQ::Batch(q) => q,
        }
    }
}

impl QFunction for FunctionQ {
    fn state_dim(&self) -> usize {
        self.inner().state_dim()
    }

    fn action_count(&self) -> usize {
        self.inner().action_count()
    }

    fn value_unchecked(&self, state: &[f64], action: usize) -> f64 {
        self.inner().value_unchecked(state, action)
    }
}

struct Explorer<'a, Q: ?Sized> {
    q: &'a Q,
    iauu: Option<(&'a StateCollapser, &'a mut CountTable, IauuConfig)>,
    epsilon: f64,
    episode: usize,
}

impl<Q: QFunction + ?Sized> ActionSelector for Explorer<'_, Q> {
    fn select(&mut self, state: &FeatureVector, rng: &mut dyn RngCore) -> Result<ActionId> {
        let choice = match &mut self.iauu {
            Some((collapser, table, cfg)) => select_action(
                self.q,
                state,
                collapser,
                table,
                cfg,
                self.epsilon,
                self.episode,
                rng,
            )?,
            None => epsilon_uniform_select(self.q, state, self.epsilon, rng)?,
        };
        Ok(choice.action)
    }
}

/// Episode loop shared by every function approximator.
///
/// `observer` sees the environment and trace after each episode, before the
/// model update.
pub fn train_approximator<E: Environment + ?Sized>(
    env: &mut E,
    kind: ApproximatorKind,
    cfg: &AgentConfig,
    collapser: Option<&StateCollapser>,
    rng: &mut dyn RngCore,
    observer: &mut dyn FnMut(&E, &EpisodeTrace),
) -> Result<TrainingRun<FunctionQ>> {
    cfg.validate()?;
    let actions = env.action_count();
    let mut model = FunctionQ::new(kind, env.observation_dim(), actions, cfg);
    let iauu = cfg.iauu();
    let mut table = match (iauu, collapser) {
        (Some(_), Some(c)) => Some(CountTable::new(c.clusters(), actions)),
        (Some(_), None) => {
            return Err(Error::InvalidParameter(
                "IAUU exploration needs a state collapser",
            ))
        }
        (None, _) => None,
    };
    let mut rewards = Vec::with_capacity(cfg.episodes);
    for t in 1..=cfg.episodes {
        if cfg.counts == CountPersistence::Reset {
            table.iter_mut().for_each(CountTable::clear);
        }
        let mut policy = Explorer {
            q: &model,
            iauu: match (&mut table, collapser, iauu) {
                (Some(table), Some(c), Some(i)) => Some((c, table, i)),
                _ => None,
            },
            epsilon: cfg.schedule.epsilon(t),
            episode: t,
        };
        let trace = run_episode(env, &mut policy, cfg.max_steps, rng)?;
        rewards.push(trace.total_reward());
        observer(env, &trace);
        model.learn(trace, cfg.schedule.alpha(t), cfg, rng)?;
    }
    Ok(TrainingRun { model, rewards })
}

/// GEQL: the boosted approximator with IAUU exploration over `collapser`.
///
/// Uses the IAUU settings from `cfg` when present, the defaults otherwise.
pub fn train_geql<E: Environment + ?Sized>(
    env: &mut E,
    cfg: &AgentConfig,
    collapser: &StateCollapser,
    rng: &mut dyn RngCore,
    observer: &mut dyn FnMut(&E, &EpisodeTrace),
) -> Result<TrainingRun<BoostedQ>> {
    let exploration = match cfg.exploration {
        Exploration::Uniform => Exploration::Iauu(IauuConfig::default()),
        e => e,
    };
    let cfg = AgentConfig {
        exploration,
        ..*cfg
    };
    let run = train_approximator(
        env,
        ApproximatorKind::Booster,
        &cfg,
        Some(collapser),
        rng,
        observer,
    )?;
    match run.model {
        FunctionQ::Booster(model) => Ok(TrainingRun {
            model,
            rewards: run.rewards,
        }),
        _ => unreachable!("booster requested"),
    }
}

/// Linear, batch-boosted or forest approximator under `cfg`'s exploration.
pub fn train_baseline<E: Environment + ?Sized>(
    env: &mut E,
    kind: ApproximatorKind,
    cfg: &AgentConfig,
    collapser: Option<&StateCollapser>,
    rng: &mut dyn RngCore,
    observer: &mut dyn FnMut(&E, &EpisodeTrace),
) -> Result<TrainingRun<FunctionQ>> {
    if kind == ApproximatorKind::Booster {
        return Err(Error::InvalidParameter(
            "the boosted approximator is trained by train_geql",
        ));
    }
    train_approximator(env, kind, cfg, collapser, rng, observer)
}

/// Tabular Q-learning with per-step updates. IAUU counts are kept per
/// discrete state (the identity collapser).
pub fn train_tabular<E: DiscreteEnvironment + ?Sized>(
    env: &mut E,
    cfg: &AgentConfig,
    rng: &mut dyn RngCore,
) -> Result<TrainingRun<TabularQ>> {
    cfg.validate()?;
    let actions = env.action_count();
    let mut q = TabularQ::new(env.state_count(), actions);
    let iauu = cfg.iauu();
    let mut table = CountTable::new(env.state_count(), actions);
    let mut rewards = Vec::with_capacity(cfg.episodes);
    for t in 1..=cfg.episodes {
        if cfg.counts == CountPersistence::Reset {
            table.clear();
        }
        let epsilon = cfg.schedule.epsilon(t);
        let alpha = cfg.schedule.alpha(t);
        env.reset(rng);
        let mut total = 0.0;
        for _ in 0..cfg.max_steps {
            let s = env.state_id();
            let choice = match &iauu {
                Some(c) => iauu_choose(q.row(s), s, &mut table, c, epsilon, t, rng),
                None => epsilon_uniform_choose(q.row(s), epsilon, rng),
            };
            let step = env.step(choice.action, rng)?;
            total += step.reward;
            tabular_update(
                &mut q,
                s,
                choice.action,
                step.reward,
                env.state_id(),
                step.terminal,
                alpha,
                cfg.gamma,
            );
            if step.terminal {
                break;
            }
        }
        rewards.push(total);
    }
    Ok(TrainingRun { model: q, rewards })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::toy::ModelEnv;
    use crate::seeded_rng;

    #[test]
    fn zero_episodes_leaves_an_empty_ensemble() {
        let mut env = ModelEnv::bandit();
        let cfg = AgentConfig {
            episodes: 0,
            ..AgentConfig::default()
        };
        let run = train_geql(
            &mut env,
            &cfg,
            &StateCollapser::identity(1),
            &mut seeded_rng(0),
            &mut |_, _| {},
        )
        .unwrap();
        assert!(run.model.is_empty());
        assert!(run.rewards.is_empty());
    }

    #[test]
    fn one_tree_per_episode() {
        let mut env = ModelEnv::two_state_chain();
        let cfg = AgentConfig {
            episodes: 17,
            max_steps: 5,
            ..AgentConfig::default()
        };
        let run = train_geql(
            &mut env,
            &cfg,
            &StateCollapser::identity(2),
            &mut seeded_rng(4),
            &mut |_, _| {},
        )
        .unwrap();
        assert_eq!(run.model.len(), 17);
        assert_eq!(run.rewards.len(), 17);
    }

    #[test]
    fn iauu_without_collapser_is_rejected() {
        let mut env = ModelEnv::bandit();
        let r = train_baseline(
            &mut env,
            ApproximatorKind::Linear,
            &AgentConfig::default(),
            None,
            &mut seeded_rng(0),
            &mut |_, _| {},
        );
        assert!(r.is_err());
    }

    #[test]
    fn batch_period_beyond_horizon_never_trains() {
        let mut env = ModelEnv::bandit();
        let cfg = AgentConfig {
            episodes: 10,
            max_steps: 3,
            batch_period: 11,
            exploration: Exploration::Uniform,
            ..AgentConfig::default()
        };
        let run = train_baseline(
            &mut env,
            ApproximatorKind::BatchBoost,
            &cfg,
            None,
            &mut seeded_rng(1),
            &mut |_, _| {},
        )
        .unwrap();
        match run.model {
            FunctionQ::Batch(q) => assert!(!q.is_trained()),
            _ => panic!("expected a batch model"),
        }
    }
}
