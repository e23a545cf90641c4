//! Experiment descriptions: task, agent grid, hyperparameters.
//!
//! A config file is flat `key = value` lines (`#` starts a comment). Keys
//! match the long CLI flags with dashes or underscores, and command-line
//! values override the file.

use std::fmt;
use std::str::FromStr;

use geql_core::agents::{AgentConfig, ApproximatorKind, CountPersistence, Exploration, RMaxConfig};
use geql_core::explore::{IauuConfig, IauuVariant};
use geql_core::learners::{TreeParams, DEFAULT_RIDGE};
use geql_core::qfunc::LearningSchedule;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown task `{0}`")]
    Task(String),
    #[error("unknown agent `{0}`")]
    Agent(String),
    #[error("unknown key `{0}`")]
    Key(String),
    #[error("bad value `{value}` for `{key}`")]
    Value { key: String, value: String },
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("{0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Blackjack,
    NChain,
    GridWorld,
    HillClimb,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Blackjack => "blackjack",
            Task::NChain => "nchain",
            Task::GridWorld => "gridworld",
            Task::HillClimb => "hillclimb",
        }
    }

    pub fn default_max_steps(self) -> usize {
        match self {
            Task::Blackjack => 20,
            Task::NChain => 50,
            Task::GridWorld | Task::HillClimb => 80,
        }
    }

    pub fn default_clusters(self) -> usize {
        match self {
            Task::Blackjack => 16,
            Task::NChain => 0,
            Task::GridWorld | Task::HillClimb => 64,
        }
    }

    /// Batch retrain period and window, in episodes.
    pub fn default_batch_schedule(self) -> (usize, usize) {
        match self {
            Task::Blackjack | Task::NChain => (50, 50),
            Task::GridWorld | Task::HillClimb => (5, 5),
        }
    }
}

impl FromStr for Task {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "blackjack" => Task::Blackjack,
            "nchain" | "n-chain" | "chain" => Task::NChain,
            "gridworld" | "grid" => Task::GridWorld,
            "hillclimb" | "hill" => Task::HillClimb,
            _ => return Err(ConfigError::Task(s.into())),
        })
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Learner {
    Function(ApproximatorKind),
    Tabular,
    RMax,
}

impl Learner {
    pub fn name(self) -> &'static str {
        match self {
            Learner::Function(ApproximatorKind::Booster) => "booster",
            Learner::Function(ApproximatorKind::Linear) => "linear",
            Learner::Function(ApproximatorKind::BatchBoost) => "batchboost",
            Learner::Function(ApproximatorKind::Forest) => "forest",
            Learner::Tabular => "tabular",
            Learner::RMax => "rmax",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExplorationKind {
    Uniform,
    /// IAUU; `None` takes the experiment-wide variant.
    Iauu(Option<IauuVariant>),
    /// RMax explores through its optimistic model.
    Optimism,
}

impl ExplorationKind {
    pub fn name(self) -> &'static str {
        match self {
            ExplorationKind::Uniform => "uniform",
            ExplorationKind::Iauu(None) => "iauu",
            ExplorationKind::Iauu(Some(v)) => variant_name(v),
            ExplorationKind::Optimism => "optimism",
        }
    }
}

fn variant_name(v: IauuVariant) -> &'static str {
    match v {
        IauuVariant::Plain => "iauu",
        IauuVariant::UniformMix => "iauu-mix",
        IauuVariant::ExploreOnlyCounts => "iauu-explore-counts",
    }
}

fn parse_variant(s: &str) -> Option<IauuVariant> {
    match s {
        "iauu" | "plain" => Some(IauuVariant::Plain),
        "iauu-mix" | "mix" | "uniform-mix" => Some(IauuVariant::UniformMix),
        "iauu-explore-counts" | "explore-counts" | "explore-only-counts" => {
            Some(IauuVariant::ExploreOnlyCounts)
        }
        _ => None,
    }
}

/// One column of the agent grid, written `learner-exploration`
/// (`booster-iauu`, `linear-uniform`, `tabular-iauu-mix`, `rmax`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentSpec {
    pub learner: Learner,
    pub exploration: ExplorationKind,
}

impl AgentSpec {
    pub fn new(learner: Learner, exploration: ExplorationKind) -> Self {
        Self {
            learner,
            exploration,
        }
    }
}

impl FromStr for AgentSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let name = s.trim().to_ascii_lowercase();
        if name == "rmax" {
            return Ok(AgentSpec::new(Learner::RMax, ExplorationKind::Optimism));
        }
        let (head, tail) = name
            .split_once('-')
            .ok_or_else(|| ConfigError::Agent(s.into()))?;
        let learner = match head {
            "booster" | "geql" => Learner::Function(ApproximatorKind::Booster),
            "linear" => Learner::Function(ApproximatorKind::Linear),
            "batchboost" => Learner::Function(ApproximatorKind::BatchBoost),
            "forest" => Learner::Function(ApproximatorKind::Forest),
            "tabular" => Learner::Tabular,
            _ => return Err(ConfigError::Agent(s.into())),
        };
        let exploration = match tail {
            "uniform" => ExplorationKind::Uniform,
            "iauu" => ExplorationKind::Iauu(None),
            other => ExplorationKind::Iauu(Some(
                parse_variant(other).ok_or_else(|| ConfigError::Agent(s.into()))?,
            )),
        };
        Ok(AgentSpec::new(learner, exploration))
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.learner {
            Learner::RMax => f.write_str("rmax"),
            l => write!(f, "{}-{}", l.name(), self.exploration.name()),
        }
    }
}

pub fn parse_agents(list: &str) -> Result<Vec<AgentSpec>, ConfigError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Hyperparameters. `None` means the task default.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub rho: f64,
    pub clusters: Option<usize>,
    pub epsilon0: f64,
    pub alpha0: f64,
    pub gamma: f64,
    pub decay: f64,
    pub tree_depth: usize,
    pub max_steps: Option<usize>,
    pub batch_period: Option<usize>,
    pub batch_window: Option<usize>,
    pub batch_trees: usize,
    pub batch_shrinkage: f64,
    pub iauu_variant: IauuVariant,
    pub count_persistence: CountPersistence,
    pub ridge: f64,
    pub chain_length: usize,
    pub codebook_size: usize,
    pub terrain_size: usize,
    pub known_threshold: u32,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            rho: 1.0,
            clusters: None,
            epsilon0: 0.4,
            alpha0: 0.15,
            gamma: 0.95,
            decay: 0.04,
            tree_depth: 2,
            max_steps: None,
            batch_period: None,
            batch_window: None,
            batch_trees: 500,
            batch_shrinkage: 0.1,
            iauu_variant: IauuVariant::Plain,
            count_persistence: CountPersistence::Persist,
            ridge: DEFAULT_RIDGE,
            chain_length: 5,
            codebook_size: 10,
            terrain_size: 64,
            known_threshold: 5,
        }
    }
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim().parse().map_err(|_| ConfigError::Value {
        key: key.into(),
        value: v.into(),
    })
}

impl Params {
    /// Sets one hyperparameter by its config key.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('_', "-");
        let k = key.as_str();
        match k {
            "rho" => self.rho = value(k, v)?,
            "clusters" => self.clusters = Some(value(k, v)?),
            "epsilon0" => self.epsilon0 = value(k, v)?,
            "alpha0" => self.alpha0 = value(k, v)?,
            "gamma" => self.gamma = value(k, v)?,
            "decay" => self.decay = value(k, v)?,
            "tree-depth" => self.tree_depth = value(k, v)?,
            "max-steps" => self.max_steps = Some(value(k, v)?),
            "batch-period" => self.batch_period = Some(value(k, v)?),
            "batch-window" => self.batch_window = Some(value(k, v)?),
            "batch-trees" => self.batch_trees = value(k, v)?,
            "batch-shrinkage" => self.batch_shrinkage = value(k, v)?,
            "ridge" => self.ridge = value(k, v)?,
            "chain-length" => self.chain_length = value(k, v)?,
            "codebook-size" => self.codebook_size = value(k, v)?,
            "terrain-size" => self.terrain_size = value(k, v)?,
            "known-threshold" => self.known_threshold = value(k, v)?,
            "iauu-variant" => {
                self.iauu_variant = parse_variant(v.trim()).ok_or_else(|| ConfigError::Value {
                    key: k.into(),
                    value: v.into(),
                })?
            }
            "count-persistence" => {
                self.count_persistence = match v.trim() {
                    "persist" => CountPersistence::Persist,
                    "reset" => CountPersistence::Reset,
                    _ => {
                        return Err(ConfigError::Value {
                            key: k.into(),
                            value: v.into(),
                        })
                    }
                }
            }
            _ => return Err(ConfigError::Key(key.clone())),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub task: Task,
    pub agents: Vec<AgentSpec>,
    pub trials: usize,
    pub episodes: usize,
    pub seed: u64,
    pub params: Params,
}

impl ExperimentSpec {
    pub fn new(
        task: Task,
        agents: Vec<AgentSpec>,
        trials: usize,
        episodes: usize,
        seed: u64,
    ) -> Self {
        Self {
            task,
            agents,
            trials,
            episodes,
            seed,
            params: Params::default(),
        }
    }

    /// Sets a top-level field or hyperparameter by key.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key.trim() {
            "task" => self.task = v.parse()?,
            "agents" => self.agents = parse_agents(v)?,
            "trials" => self.trials = value(key, v)?,
            "episodes" => self.episodes = value(key, v)?,
            "seed" => self.seed = value(key, v)?,
            other => self.params.set(other, v)?,
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_config(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax(n + 1))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1"));
        }
        if self.agents.is_empty() {
            return Err(ConfigError::Invalid("no agents given"));
        }
        for a in &self.agents {
            let discrete = matches!(a.learner, Learner::Tabular | Learner::RMax);
            if discrete && self.task == Task::HillClimb {
                return Err(ConfigError::Invalid(
                    "tabular agents need a task with discrete states",
                ));
            }
            if a.learner == Learner::RMax && self.task != Task::NChain {
                return Err(ConfigError::Invalid("rmax runs on the n-chain task only"));
            }
        }
        Ok(())
    }

    pub fn max_steps(&self) -> usize {
        self.params
            .max_steps
            .unwrap_or_else(|| self.task.default_max_steps())
    }

    pub fn clusters(&self) -> usize {
        self.params
            .clusters
            .unwrap_or_else(|| self.task.default_clusters())
    }

    /// Training configuration for one agent of the grid.
    pub fn agent_config(&self, agent: &AgentSpec) -> AgentConfig {
        let p = &self.params;
        let (period, window) = self.task.default_batch_schedule();
        let exploration = match agent.exploration {
            ExplorationKind::Iauu(v) => Exploration::Iauu(IauuConfig {
                rho: p.rho,
                variant: v.unwrap_or(p.iauu_variant),
                horizon: self.max_steps(),
            }),
            _ => Exploration::Uniform,
        };
        AgentConfig {
            schedule: LearningSchedule {
                epsilon0: p.epsilon0,
                alpha0: p.alpha0,
                decay: p.decay,
            },
            gamma: p.gamma,
            episodes: self.episodes,
            max_steps: self.max_steps(),
            exploration,
            counts: p.count_persistence,
            tree: TreeParams::depth(p.tree_depth),
            batch_trees: p.batch_trees,
            batch_shrinkage: p.batch_shrinkage,
            batch_period: p.batch_period.unwrap_or(period),
            batch_window: p.batch_window.unwrap_or(window),
            ridge: p.ridge,
        }
    }

    pub fn rmax_config(&self) -> RMaxConfig {
        RMaxConfig {
            known_threshold: self.params.known_threshold,
            gamma: self.params.gamma,
            max_steps: self.max_steps(),
            ..RMaxConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agent_names_round_trip() {
        for name in [
            "booster-iauu",
            "linear-uniform",
            "forest-iauu",
            "batchboost-uniform",
            "tabular-iauu-mix",
            "tabular-iauu-explore-counts",
            "rmax",
        ] {
            assert_eq!(name.parse::<AgentSpec>().unwrap().to_string(), name);
        }
        assert!("booster".parse::<AgentSpec>().is_err());
        assert!("tree-iauu".parse::<AgentSpec>().is_err());
    }

    #[test]
    fn config_lines_override_defaults() {
        let mut spec = ExperimentSpec::new(Task::NChain, vec![], 1, 1, 0);
        spec.apply_config("task = blackjack\nagents = booster-iauu, linear-uniform # two\nrho=2.5\n\n# note\nbatch_period = 7")
            .unwrap();
        assert_eq!(spec.task, Task::Blackjack);
        assert_eq!(spec.agents.len(), 2);
        assert_eq!(spec.params.rho, 2.5);
        assert_eq!(spec.agent_config(&spec.agents[0]).batch_period, 7);
        assert_eq!(spec.apply_config("nonsense"), Err(ConfigError::Syntax(1)));
        assert!(spec.apply_config("colour = red").is_err());
    }

    #[test]
    fn discrete_agents_need_discrete_tasks() {
        let spec = ExperimentSpec::new(
            Task::HillClimb,
            vec!["tabular-uniform".parse().unwrap()],
            1,
            1,
            0,
        );
        assert!(spec.validate().is_err());
    }
}
