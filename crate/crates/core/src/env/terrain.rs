//! Block-terrain simulator for the hill-climbing task.
//!
//! The world is a square heightmap of integer elevations. The agent stands on
//! top of a column (its elevation is the column height), faces one of four
//! headings, and can walk forward over rises of at most one block, jump
//! forward over rises of at most two, turn, or jump in place. Drops of any
//! size are allowed. Each step pays the elevation change plus a small bonus
//! proportional to the height above sea level.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::vision::{self, Descriptor};
use crate::cluster::StateCollapser;
use crate::math::{round, sqrt};
use crate::{seeded_rng, ActionId, Environment, Error, FeatureVector, Result, Step};

/// Largest rise a plain forward step can climb.
pub const MAX_STEP_UP: i32 = 1;
/// Largest rise a forward jump can clear.
pub const MAX_JUMP_UP: i32 = 2;
/// Height bonus per block above sea level, per step.
pub const HEIGHT_BONUS: f64 = 1.0 / 1000.0;
pub const ACTION_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerrainWorld {
    size: usize,
    heights: Vec<i32>,
    sea_level: i32,
}

impl TerrainWorld {
    pub fn new(size: usize, heights: Vec<i32>, sea_level: i32) -> Result<Self> {
        if heights.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                found: heights.len(),
            });
        }
        Ok(Self {
            size,
            heights,
            sea_level,
        })
    }

    pub fn flat(size: usize, level: i32) -> Self {
        Self {
            size,
            heights: vec![level; size * size],
            sea_level: level,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sea_level(&self) -> i32 {
        self.sea_level
    }

    pub fn set_sea_level(&mut self, level: i32) {
        self.sea_level = level;
    }

    /// Row-major heights, `y * size + x`.
    pub fn heights(&self) -> &[i32] {
        &self.heights
    }

    #[inline]
    pub fn height(&self, x: usize, y: usize) -> i32 {
        self.heights[y * self.size + x]
    }

    pub fn set_height(&mut self, x: usize, y: usize, h: i32) {
        self.heights[y * self.size + x] = h;
    }

    /// Height at a possibly out-of-range cell, clamped to the nearest edge.
    #[inline]
    pub fn height_clamped(&self, x: i64, y: i64) -> i32 {
        let max = self.size as i64 - 1;
        self.height(x.clamp(0, max) as usize, y.clamp(0, max) as usize)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.size && (y as usize) < self.size
    }

    /// Block at `level` in column `(x, y)` is solid iff `level < height`.
    pub fn solid(&self, x: i64, y: i64, level: i32) -> bool {
        level < self.height_clamped(x, y)
    }

    pub fn max_height(&self) -> i32 {
        self.heights.iter().copied().max().unwrap_or(0)
    }

    pub fn min_height(&self) -> i32 {
        self.heights.iter().copied().min().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    /// Unit step `(dx, dy)`; north is `+y`, east is `+x`.
    pub fn forward(self) -> (i64, i64) {
        match self {
            Heading::North => (0, 1),
            Heading::East => (1, 0),
            Heading::South => (0, -1),
            Heading::West => (-1, 0),
        }
    }

    /// Unit step to the agent's right.
    pub fn right(self) -> (i64, i64) {
        self.turn_right().forward()
    }

    pub fn turn_right(self) -> Self {
        match self {
            Heading::North => Heading::East,
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
        }
    }

    pub fn turn_left(self) -> Self {
        self.turn_right().turn_right().turn_right()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pose {
    pub x: usize,
    pub y: usize,
    pub heading: Heading,
}

impl Pose {
    pub fn new(x: usize, y: usize, heading: Heading) -> Self {
        Self { x, y, heading }
    }

    /// World cell `forward` steps ahead and `lateral` steps to the right.
    #[inline]
    pub fn offset(&self, forward: i64, lateral: i64) -> (i64, i64) {
        let (fx, fy) = self.heading.forward();
        let (rx, ry) = self.heading.right();
        (
            self.x as i64 + forward * fx + lateral * rx,
            self.y as i64 + forward * fy + lateral * ry,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerrainAction {
    Forward,
    TurnLeft,
    TurnRight,
    Jump,
    JumpForward,
}

impl TerrainAction {
    pub const ALL: [TerrainAction; ACTION_COUNT] = [
        TerrainAction::Forward,
        TerrainAction::TurnLeft,
        TerrainAction::TurnRight,
        TerrainAction::Jump,
        TerrainAction::JumpForward,
    ];

    pub fn from_id(action: ActionId) -> Result<Self> {
        Self::ALL
            .get(action.0)
            .copied()
            .ok_or(Error::ActionOutOfRange {
                action: action.0,
                count: ACTION_COUNT,
            })
    }

    pub fn id(self) -> ActionId {
        ActionId(self as usize)
    }
}

/// Applies one action; returns the new pose and its reward.
pub fn terrain_step(world: &TerrainWorld, pose: Pose, action: TerrainAction) -> (Pose, f64) {
    let z = world.height(pose.x, pose.y);
    let moved = |max_rise: i32| -> Pose {
        let (tx, ty) = pose.offset(1, 0);
        if world.contains(tx, ty) && world.height(tx as usize, ty as usize) - z <= max_rise {
            Pose {
                x: tx as usize,
                y: ty as usize,
                ..pose
            }
        } else {
            pose
        }
    };
    let next = match action {
        TerrainAction::Forward => moved(MAX_STEP_UP),
        TerrainAction::JumpForward => moved(MAX_JUMP_UP),
        TerrainAction::TurnLeft => Pose {
            heading: pose.heading.turn_left(),
            ..pose
        },
        TerrainAction::TurnRight => Pose {
            heading: pose.heading.turn_right(),
            ..pose
        },
        TerrainAction::Jump => pose,
    };
    let z_next = world.height(next.x, next.y);
    let reward = f64::from(z_next - z) + f64::from(z_next - world.sea_level) * HEIGHT_BONUS;
    (next, reward)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerrainParams {
    /// Per-octave decay of the displacement in `[0, 1]`; zero gives a flat world.
    pub roughness: f64,
    /// Displacement of the coarsest octave, in blocks.
    pub amplitude: f64,
    /// 3x3 box-blur passes applied before rounding.
    pub smoothing: usize,
}

impl Default for TerrainParams {
    fn default() -> Self {
        Self {
            roughness: 0.55,
            amplitude: 28.0,
            smoothing: 2,
        }
    }
}

/// Midpoint-displacement (diamond-square) heightmap, shifted so the lowest
/// cell sits at sea level 0.
///
/// For sizes of at least 16 and positive roughness, a map without two peaks
/// at least 16 cells apart is rejected and regenerated from the next seed.
pub fn generate_terrain(seed: u64, size: usize, params: TerrainParams) -> TerrainWorld {
    let mut attempt_seed = seed;
    let mut world = diamond_square(attempt_seed, size, params);
    if size < 16 || params.roughness <= 0.0 {
        return world;
    }
    for _ in 0..64 {
        if has_separated_peaks(&world, 16.0) {
            break;
        }
        attempt_seed = attempt_seed.wrapping_add(1);
        world = diamond_square(attempt_seed, size, params);
    }
    world
}

fn diamond_square(seed: u64, size: usize, params: TerrainParams) -> TerrainWorld {
    let mut rng = seeded_rng(seed);
    let mut n = 2;
    while n + 1 < size {
        n *= 2;
    }
    let side = n + 1;
    let mut grid = vec![0.0f64; side * side];
    let idx = |x: usize, y: usize| y * side + x;
    let mut scale = params.amplitude * params.roughness;
    let jitter = |rng: &mut crate::SeededRng, s: f64| {
        if s > 0.0 {
            rng.random_range(-1.0..1.0) * s
        } else {
            0.0
        }
    };

    for &(x, y) in &[(0, 0), (n, 0), (0, n), (n, n)] {
        grid[idx(x, y)] = jitter(&mut rng, scale);
    }
    let mut step = n;
    while step > 1 {
        let half = step / 2;
        for y in (half..side).step_by(step) {
            for x in (half..side).step_by(step) {
                let avg = (grid[idx(x - half, y - half)]
                    + grid[idx(x + half, y - half)]
                    + grid[idx(x - half, y + half)]
                    + grid[idx(x + half, y + half)])
                    / 4.0;
                grid[idx(x, y)] = avg + jitter(&mut rng, scale);
            }
        }
        for y in (0..side).step_by(half) {
            let start = if (y / half) % 2 == 0 { half } else { 0 };
            for x in (start..side).step_by(step) {
                let mut sum = 0.0;
                let mut count = 0.0;
                if x >= half {
                    sum += grid[idx(x - half, y)];
                    count += 1.0;
                }
                if x + half < side {
                    sum += grid[idx(x + half, y)];
                    count += 1.0;
                }
                if y >= half {
                    sum += grid[idx(x, y - half)];
                    count += 1.0;
                }
                if y + half < side {
                    sum += grid[idx(x, y + half)];
                    count += 1.0;
                }
                grid[idx(x, y)] = sum / count + jitter(&mut rng, scale);
            }
        }
        step = half;
        scale *= params.roughness;
    }

    let mut field: Vec<f64> = (0..size * size)
        .map(|i| grid[idx(i % size, i / size)])
        .collect();
    for _ in 0..params.smoothing {
        field = box_blur(&field, size);
    }
    let mut heights: Vec<i32> = field.iter().map(|&v| round(v) as i32).collect();
    let min = heights.iter().copied().min().unwrap_or(0);
    heights.iter_mut().for_each(|h| *h -= min);
    TerrainWorld {
        size,
        heights,
        sea_level: 0,
    }
}

fn box_blur(field: &[f64], size: usize) -> Vec<f64> {
    let mut out = vec![0.0; field.len()];
    for y in 0..size {
        for x in 0..size {
            let mut sum = 0.0;
            let mut count = 0.0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < size && (ny as usize) < size {
                        sum += field[ny as usize * size + nx as usize];
                        count += 1.0;
                    }
                }
            }
            out[y * size + x] = sum / count;
        }
    }
    out
}

/// Cells that are the highest within Chebyshev radius 4 and stand at least 3
/// blocks above the lowest cell of that window.
pub fn find_peaks(world: &TerrainWorld) -> Vec<(usize, usize)> {
    let r = 4i64;
    let mut peaks = Vec::new();
    for y in 0..world.size {
        for x in 0..world.size {
            let h = world.height(x, y);
            let mut is_max = true;
            let mut low = h;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if !world.contains(nx, ny) {
                        continue;
                    }
                    let nh = world.height(nx as usize, ny as usize);
                    is_max &= nh <= h;
                    low = low.min(nh);
                }
            }
            if is_max && h - low >= 3 {
                peaks.push((x, y));
            }
        }
    }
    peaks
}

fn has_separated_peaks(world: &TerrainWorld, min_distance: f64) -> bool {
    let peaks = find_peaks(world);
    peaks.iter().enumerate().any(|(i, a)| {
        peaks[i + 1..].iter().any(|b| {
            let dx = a.0 as f64 - b.0 as f64;
            let dy = a.1 as f64 - b.1 as f64;
            sqrt(dx * dx + dy * dy) >= min_distance
        })
    })
}

/// Start pose: the lowest cell of the central region (ties to the first in
/// row-major order), facing north.
pub fn default_spawn(world: &TerrainWorld) -> Pose {
    let lo = world.size / 4;
    let hi = world.size - lo;
    let mut best = (lo, lo);
    for y in lo..hi {
        for x in lo..hi {
            if world.height(x, y) < world.height(best.0, best.1) {
                best = (x, y);
            }
        }
    }
    Pose::new(best.0, best.1, Heading::North)
}

/// Partition descriptors sampled every `sample_every` steps of a random walk
/// that restarts from `spawn` every `episode_cap` steps.
pub fn descriptor_corpus(
    world: &TerrainWorld,
    spawn: Pose,
    steps: usize,
    sample_every: usize,
    episode_cap: usize,
    rng: &mut dyn RngCore,
) -> Vec<Descriptor> {
    let mut corpus = Vec::new();
    let mut pose = spawn;
    for step in 0..steps {
        if step % episode_cap.max(1) == 0 {
            pose = spawn;
        }
        if step % sample_every.max(1) == 0 {
            corpus.extend(vision::partition_descriptors(
                world,
                pose,
                world.height(pose.x, pose.y),
            ));
        }
        let action = TerrainAction::ALL[rng.random_range(0..ACTION_COUNT)];
        pose = terrain_step(world, pose, action).0;
    }
    corpus
}

/// Hill-climbing task over a fixed world with a fixed start pose.
///
/// Sea level is the start elevation, so the height bonus is measured
/// relative to where the agent begins.
#[derive(Debug, Clone)]
pub struct HillClimb {
    world: Arc<TerrainWorld>,
    codebook: Arc<StateCollapser>,
    spawn: Pose,
    pose: Pose,
    track: Vec<i32>,
}

impl HillClimb {
    pub fn new(
        world: Arc<TerrainWorld>,
        codebook: Arc<StateCollapser>,
        spawn: Pose,
    ) -> Result<Self> {
        if codebook.dim() != vision::DESCRIPTOR_DIM {
            return Err(Error::DimensionMismatch {
                expected: vision::DESCRIPTOR_DIM,
                found: codebook.dim(),
            });
        }
        if !world.contains(spawn.x as i64, spawn.y as i64) {
            return Err(Error::InvalidParameter("spawn outside the world"));
        }
        Ok(Self {
            world,
            codebook,
            spawn,
            pose: spawn,
            track: Vec::new(),
        })
    }

    /// World with its sea level moved to the spawn elevation.
    pub fn anchor_sea_level(mut world: TerrainWorld, spawn: Pose) -> TerrainWorld {
        let z = world.height(spawn.x, spawn.y);
        world.set_sea_level(z);
        world
    }

    pub fn world(&self) -> &TerrainWorld {
        &self.world
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn elevation(&self) -> i32 {
        self.world.height(self.pose.x, self.pose.y)
    }

    /// Elevations relative to the start, one entry per visited pose of the
    /// current episode (the start included).
    pub fn elevation_track(&self) -> &[i32] {
        &self.track
    }

    fn observe(&self) -> FeatureVector {
        vision::extract_features(&self.world, self.pose, &self.codebook)
            .expect("codebook dimension checked at construction")
    }
}

impl Environment for HillClimb {
    fn observation_dim(&self) -> usize {
        vision::feature_dim(self.codebook.clusters())
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> FeatureVector {
        self.pose = self.spawn;
        self.track.clear();
        self.track.push(0);
        self.observe()
    }

    fn step(&mut self, action: ActionId, _rng: &mut dyn RngCore) -> Result<Step> {
        let action = TerrainAction::from_id(action)?;
        let (pose, reward) = terrain_step(&self.world, self.pose, action);
        self.pose = pose;
        let start = self.world.height(self.spawn.x, self.spawn.y);
        self.track.push(self.elevation() - start);
        Ok(Step {
            observation: self.observe(),
            reward,
            terminal: false,
        })
    }
}
