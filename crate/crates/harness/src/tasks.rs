//! Per-task environments and the offline artifacts shared by every trial.
//!
//! The state collapser (and, for the visual tasks, the descriptor codebook)
//! is built once per experiment from random-policy play, so every IAUU agent
//! of a task explores with the same clusters.

use std::sync::Arc;

use anyhow::{Context, Result};
use geql_core::cluster::{
    build_collapser_from_random_policy, kmeans_fit, StateCollapser, DEFAULT_MAX_ITERS,
};
use geql_core::env::blackjack::Blackjack;
use geql_core::env::gridworld::{self, GridWorld};
use geql_core::env::nchain::NChain;
use geql_core::env::terrain::{self, HillClimb, Pose, TerrainParams, TerrainWorld};
use geql_core::SeededRng;

use crate::config::{ExperimentSpec, Task};

/// Corpus length of the collapser protocol: five minutes of play at 30
/// frames per second, keeping every 20th frame.
pub const CORPUS_STEPS: usize = 9000;
pub const SAMPLE_EVERY: usize = 20;
/// Blackjack has no frames; its collapser sees this many consecutive states.
pub const BLACKJACK_CORPUS: usize = 5000;

#[derive(Debug, Clone)]
pub struct TaskSetup {
    pub task: Task,
    pub collapser: Arc<StateCollapser>,
    pub codebook: Option<Arc<StateCollapser>>,
    pub world: Option<Arc<TerrainWorld>>,
    pub spawn: Option<Pose>,
    pub chain_length: usize,
}

/// One environment instance, owned by a single trial.
#[derive(Debug, Clone)]
pub enum TaskEnv {
    Blackjack(Blackjack),
    NChain(NChain),
    GridWorld(GridWorld),
    HillClimb(HillClimb),
}

impl TaskSetup {
    pub fn build(spec: &ExperimentSpec, rng: &mut SeededRng) -> Result<Self> {
        let p = &spec.params;
        let m = spec.clusters();
        let cap = spec.max_steps();
        let mut setup = TaskSetup {
            task: spec.task,
            collapser: Arc::new(StateCollapser::identity(1)),
            codebook: None,
            world: None,
            spawn: None,
            chain_length: p.chain_length,
        };
        match spec.task {
            Task::Blackjack => {
                let mut env = Blackjack::new();
                let fit =
                    build_collapser_from_random_policy(&mut env, BLACKJACK_CORPUS, 1, cap, m, rng)
                        .context("clustering blackjack states")?;
                setup.collapser = Arc::new(fit.collapser);
            }
            Task::NChain => {
                if p.chain_length < 2 {
                    anyhow::bail!("chain length must be at least 2");
                }
                setup.collapser = Arc::new(StateCollapser::identity(p.chain_length));
            }
            Task::GridWorld => {
                let corpus = gridworld::descriptor_corpus(CORPUS_STEPS, SAMPLE_EVERY, cap, rng);
                let book = Arc::new(
                    kmeans_fit(&corpus, p.codebook_size, DEFAULT_MAX_ITERS, rng)
                        .context("fitting the descriptor codebook")?
                        .collapser,
                );
                let mut env = GridWorld::new(book.clone())?;
                let fit = build_collapser_from_random_policy(
                    &mut env,
                    CORPUS_STEPS,
                    SAMPLE_EVERY,
                    cap,
                    m,
                    rng,
                )
                .context("clustering grid observations")?;
                setup.collapser = Arc::new(fit.collapser);
                setup.codebook = Some(book);
            }
            Task::HillClimb => {
                let world =
                    terrain::generate_terrain(spec.seed, p.terrain_size, TerrainParams::default());
                let spawn = terrain::default_spawn(&world);
                let world = Arc::new(HillClimb::anchor_sea_level(world, spawn));
                let corpus =
                    terrain::descriptor_corpus(&world, spawn, CORPUS_STEPS, SAMPLE_EVERY, cap, rng);
                let book = Arc::new(
                    kmeans_fit(&corpus, p.codebook_size, DEFAULT_MAX_ITERS, rng)
                        .context("fitting the descriptor codebook")?
                        .collapser,
                );
                let mut env = HillClimb::new(world.clone(), book.clone(), spawn)?;
                let fit = build_collapser_from_random_policy(
                    &mut env,
                    CORPUS_STEPS,
                    SAMPLE_EVERY,
                    cap,
                    m,
                    rng,
                )
                .context("clustering terrain observations")?;
                setup.collapser = Arc::new(fit.collapser);
                setup.codebook = Some(book);
                setup.world = Some(world);
                setup.spawn = Some(spawn);
            }
        }
        Ok(setup)
    }

    pub fn make_env(&self) -> Result<TaskEnv> {
        Ok(match self.task {
            Task::Blackjack => TaskEnv::Blackjack(Blackjack::new()),
            Task::NChain => TaskEnv::NChain(NChain::new(self.chain_length)),
            Task::GridWorld => TaskEnv::GridWorld(GridWorld::new(self.codebook()?)?),
            Task::HillClimb => TaskEnv::HillClimb(HillClimb::new(
                self.world.clone().context("terrain not built")?,
                self.codebook()?,
                self.spawn.context("spawn not chosen")?,
            )?),
        })
    }

    fn codebook(&self) -> Result<Arc<StateCollapser>> {
        self.codebook.clone().context("codebook not built")
    }
}
