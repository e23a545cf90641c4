//! Trial orchestration.
//!
//! Every (agent, trial) pair is an independent job. Trial `i` draws its seed
//! from stream `i + 1` of a ChaCha generator keyed by the master seed, and all
//! agents of that trial share it. Shared artifacts come from stream 0.

use anyhow::{anyhow, Result};
use geql_core::agents::{train_approximator, train_rmax, train_tabular};
use geql_core::{seeded_rng, DiscreteEnvironment, EpisodeTrace, SeededRng};
use rand::RngCore;
use rayon::prelude::*;

use crate::config::{AgentSpec, ExperimentSpec, Learner};
use crate::stats::running_average;
use crate::tasks::{TaskEnv, TaskSetup};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub agent: usize,
    pub trial: usize,
    pub seed: u64,
    pub rewards: Vec<f64>,
    /// Per episode, elevation relative to the start after each step (hill
    /// climbing only).
    pub elevations: Vec<Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub agent: &'static str,
    pub exploration: &'static str,
    pub trial: usize,
    pub episode: usize,
    pub reward: f64,
    pub running_avg: f64,
}

/// All trial outcomes of one experiment, ordered by agent then trial.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub agents: Vec<AgentSpec>,
    pub trials: Vec<TrialResult>,
}

impl ResultTable {
    pub fn for_agent(&self, agent: usize) -> impl Iterator<Item = &TrialResult> {
        self.trials.iter().filter(move |t| t.agent == agent)
    }

    /// Final running average (mean episode reward) of each trial.
    pub fn final_averages(&self, agent: usize) -> Vec<f64> {
        self.for_agent(agent)
            .map(|t| running_average(&t.rewards).last().copied().unwrap_or(0.0))
            .collect()
    }

    /// Rows for the results CSV; episodes are numbered from 1.
    pub fn rows(&self) -> impl Iterator<Item = Row> + '_ {
        self.trials.iter().flat_map(move |t| {
            let spec = &self.agents[t.agent];
            let avg = running_average(&t.rewards);
            t.rewards
                .iter()
                .zip(avg)
                .enumerate()
                .map(move |(i, (&reward, running_avg))| Row {
                    agent: spec.learner.name(),
                    exploration: spec.exploration.name(),
                    trial: t.trial,
                    episode: i + 1,
                    reward,
                    running_avg,
                })
        })
    }
}

pub fn artifact_rng(master: u64) -> SeededRng {
    let mut rng = seeded_rng(master);
    rng.set_stream(0);
    rng
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut rng = seeded_rng(master);
    rng.set_stream(trial as u64 + 1);
    rng.next_u64()
}

/// Builds the task artifacts and runs every trial.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<(TaskSetup, ResultTable)> {
    spec.validate()?;
    let setup = TaskSetup::build(spec, &mut artifact_rng(spec.seed))?;
    let table = run_trials(spec, &setup)?;
    Ok((setup, table))
}

pub fn run_trials(spec: &ExperimentSpec, setup: &TaskSetup) -> Result<ResultTable> {
    let jobs: Vec<(usize, usize)> = (0..spec.agents.len())
        .flat_map(|a| (0..spec.trials).map(move |t| (a, t)))
        .collect();
    let trials = jobs
        .into_par_iter()
        .map(|(agent, trial)| {
            let seed = trial_seed(spec.seed, trial);
            run_trial(spec, setup, agent, trial, seed).map_err(|e| {
                anyhow!(
                    "{} trial {trial} failed (seed {seed}): {e:#}",
                    spec.agents[agent]
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResultTable {
        agents: spec.agents.clone(),
        trials,
    })
}

/// One training run with its own environment and generator.
pub fn run_trial(
    spec: &ExperimentSpec,
    setup: &TaskSetup,
    agent: usize,
    trial: usize,
    seed: u64,
) -> Result<TrialResult> {
    let a = spec.agents[agent];
    let mut rng = seeded_rng(seed);
    let mut elevations = Vec::new();
    let rewards = match setup.make_env()? {
        TaskEnv::Blackjack(mut env) => train_discrete(&mut env, spec, setup, &a, &mut rng)?,
        TaskEnv::NChain(mut env) => train_discrete(&mut env, spec, setup, &a, &mut rng)?,
        TaskEnv::GridWorld(mut env) => train_discrete(&mut env, spec, setup, &a, &mut rng)?,
        TaskEnv::HillClimb(mut env) => {
            let Learner::Function(kind) = a.learner else {
                anyhow::bail!("{a} cannot run on a continuous task");
            };
            let cfg = spec.agent_config(&a);
            let mut record = |e: &geql_core::env::terrain::HillClimb, _: &EpisodeTrace| {
                elevations.push(e.elevation_track().to_vec())
            };
            train_approximator(
                &mut env,
                kind,
                &cfg,
                Some(&setup.collapser),
                &mut rng,
                &mut record,
            )?
            .rewards
        }
    };
    Ok(TrialResult {
        agent,
        trial,
        seed,
        rewards,
        elevations,
    })
}

fn train_discrete<E: DiscreteEnvironment>(
    env: &mut E,
    spec: &ExperimentSpec,
    setup: &TaskSetup,
    agent: &AgentSpec,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let cfg = spec.agent_config(agent);
    Ok(match agent.learner {
        Learner::Function(kind) => {
            train_approximator(
                env,
                kind,
                &cfg,
                Some(&setup.collapser),
                rng,
                &mut |_: &E, _| {},
            )?
            .rewards
        }
        Learner::Tabular => train_tabular(env, &cfg, rng)?.rewards,
        Learner::RMax => train_rmax(env, &spec.rmax_config(), spec.episodes, rng)?.rewards,
    })
}
