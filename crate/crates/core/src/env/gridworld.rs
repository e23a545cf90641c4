//! 6x6 navigation task observed through the visual feature pipeline.
//!
//! The agent starts at `(0, 0)` and must reach `(5, 5)` with deterministic
//! North/East/South/West moves (clipped at the walls). Each step pays the
//! negated Euclidean distance from the new cell to the goal; reaching the
//! goal ends the episode.
//!
//! Visually the grid is the floor of an 8x8 block arena: walls of height 3
//! surround it and a tall pillar marks the corner beyond the goal, so the
//! view differs across cells. The agent always faces north.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::terrain::{Heading, Pose, TerrainWorld};
use super::vision::{self, Descriptor};
use crate::cluster::StateCollapser;
use crate::math::sqrt;
use crate::{ActionId, DiscreteEnvironment, Environment, Error, FeatureVector, Result, Step};

pub const SIZE: usize = 6;
pub const GOAL: GridState = GridState { x: 5, y: 5 };
pub const START: GridState = GridState { x: 0, y: 0 };
pub const NORTH: ActionId = ActionId(0);
pub const EAST: ActionId = ActionId(1);
pub const SOUTH: ActionId = ActionId(2);
pub const WEST: ActionId = ActionId(3);
pub const WALL_HEIGHT: i32 = 3;
pub const PILLAR_HEIGHT: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridState {
    pub x: usize,
    pub y: usize,
}

impl GridState {
    pub fn index(&self) -> usize {
        self.y * SIZE + self.x
    }

    pub fn from_index(i: usize) -> Self {
        Self {
            x: i % SIZE,
            y: i / SIZE,
        }
    }

    pub fn distance_to_goal(&self) -> f64 {
        let dx = GOAL.x as f64 - self.x as f64;
        let dy = GOAL.y as f64 - self.y as f64;
        sqrt(dx * dx + dy * dy)
    }

    /// Pose in the arena world (the floor is offset by the wall ring).
    pub fn pose(&self) -> Pose {
        Pose::new(self.x + 1, self.y + 1, Heading::North)
    }
}

/// `(next, reward, terminal)` for one move.
pub fn grid_step(state: GridState, action: ActionId) -> Result<(GridState, f64, bool)> {
    let max = SIZE - 1;
    let next = match action {
        NORTH => GridState {
            y: (state.y + 1).min(max),
            ..state
        },
        EAST => GridState {
            x: (state.x + 1).min(max),
            ..state
        },
        SOUTH => GridState {
            y: state.y.saturating_sub(1),
            ..state
        },
        WEST => GridState {
            x: state.x.saturating_sub(1),
            ..state
        },
        other => {
            return Err(Error::ActionOutOfRange {
                action: other.0,
                count: 4,
            })
        }
    };
    Ok((next, -next.distance_to_goal(), next == GOAL))
}

/// The block arena surrounding the grid.
pub fn arena() -> TerrainWorld {
    let side = SIZE + 2;
    let mut world = TerrainWorld::flat(side, 0);
    for i in 0..side {
        for (x, y) in [(i, 0), (i, side - 1), (0, i), (side - 1, i)] {
            world.set_height(x, y, WALL_HEIGHT);
        }
    }
    world.set_height(side - 1, side - 1, PILLAR_HEIGHT);
    world
}

/// Partition descriptors sampled every `sample_every` steps of a random walk
/// restarted at the start cell on reaching the goal or after `episode_cap` steps.
pub fn descriptor_corpus(
    steps: usize,
    sample_every: usize,
    episode_cap: usize,
    rng: &mut dyn RngCore,
) -> Vec<Descriptor> {
    let world = arena();
    let mut corpus = Vec::new();
    let mut state = START;
    let mut in_episode = 0;
    for step in 0..steps {
        if step % sample_every.max(1) == 0 {
            corpus.extend(vision::partition_descriptors(&world, state.pose(), 0));
        }
        let (next, _, terminal) = grid_step(state, ActionId(rng.random_range(0..4))).unwrap();
        in_episode += 1;
        if terminal || in_episode >= episode_cap {
            state = START;
            in_episode = 0;
        } else {
            state = next;
        }
    }
    corpus
}

#[derive(Debug, Clone)]
pub struct GridWorld {
    world: Arc<TerrainWorld>,
    codebook: Arc<StateCollapser>,
    state: GridState,
}

impl GridWorld {
    pub fn new(codebook: Arc<StateCollapser>) -> Result<Self> {
        if codebook.dim() != vision::DESCRIPTOR_DIM {
            return Err(Error::DimensionMismatch {
                expected: vision::DESCRIPTOR_DIM,
                found: codebook.dim(),
            });
        }
        Ok(Self {
            world: Arc::new(arena()),
            codebook,
            state: START,
        })
    }

    pub fn state(&self) -> GridState {
        self.state
    }

    pub fn observation_for(&self, state: GridState) -> FeatureVector {
        vision::extract_features(&self.world, state.pose(), &self.codebook)
            .expect("codebook dimension checked at construction")
    }
}

impl Environment for GridWorld {
    fn observation_dim(&self) -> usize {
        vision::feature_dim(self.codebook.clusters())
    }

    fn action_count(&self) -> usize {
        4
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> FeatureVector {
        self.state = START;
        self.observation_for(START)
    }

    fn step(&mut self, action: ActionId, _rng: &mut dyn RngCore) -> Result<Step> {
        let (next, reward, terminal) = grid_step(self.state, action)?;
        self.state = next;
        Ok(Step {
            observation: self.observation_for(next),
            reward,
            terminal,
        })
    }
}

impl DiscreteEnvironment for GridWorld {
    fn state_count(&self) -> usize {
        SIZE * SIZE
    }

    fn state_id(&self) -> usize {
        self.state.index()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goal_move_is_free_and_terminal() {
        assert_eq!(
            grid_step(GridState { x: 5, y: 4 }, NORTH).unwrap(),
            (GOAL, 0.0, true)
        );
    }

    #[test]
    fn east_from_origin() {
        let (next, r, done) = grid_step(START, EAST).unwrap();
        assert_eq!(next, GridState { x: 1, y: 0 });
        assert!((r + sqrt(41.0)).abs() < 1e-12);
        assert!(!done);
    }

    #[test]
    fn walls_clip() {
        assert_eq!(grid_step(START, WEST).unwrap().0, START);
        assert_eq!(grid_step(START, SOUTH).unwrap().0, START);
        assert!(grid_step(START, ActionId(4)).is_err());
    }

    #[test]
    fn cells_look_different() {
        let world = arena();
        let a = vision::partition_descriptors(&world, START.pose(), 0);
        let b = vision::partition_descriptors(&world, GridState { x: 3, y: 4 }.pose(), 0);
        assert_ne!(a, b);
    }
}
