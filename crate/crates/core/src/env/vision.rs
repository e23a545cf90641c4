//! Synthetic visual features for the block-terrain tasks.
//!
//! The agent's forward view (depth 1..=6, lateral -6..=6) is split into a
//! 3x3 grid of partitions. Each partition is summarised by a small descriptor
//! of the terrain heights relative to the agent's feet, and each descriptor
//! is encoded as its distances to the centers of a learned codebook. A local
//! occupancy grid around the agent and a constant bias complete the vector.

use alloc::vec::Vec;

use super::terrain::{Pose, TerrainWorld};
use crate::cluster::StateCollapser;
use crate::{Error, FeatureVector, Result};

pub const DESCRIPTOR_DIM: usize = 4;
pub const PARTITIONS: usize = 9;
/// Layers `z-1..=z+2`, forward `-1..=1`, lateral `-1..=1`.
pub const OCCUPANCY_DIM: usize = 36;
/// Descriptor values are relative heights divided by this.
pub const HEIGHT_SCALE: f64 = 4.0;
/// Relative heights are clamped to this many blocks either way.
pub const HEIGHT_CLAMP: i32 = 12;

pub type Descriptor = [f64; DESCRIPTOR_DIM];

const DEPTH_BANDS: [(i64, i64); 3] = [(1, 2), (3, 4), (5, 6)];
const LATERAL_BANDS: [(i64, i64); 3] = [(-6, -2), (-1, 1), (2, 6)];

/// Length of the feature vector for a codebook of `k` centers.
pub const fn feature_dim(k: usize) -> usize {
    PARTITIONS * k + OCCUPANCY_DIM + 1
}

/// Descriptors of the nine partitions, near bands first, left to right.
///
/// Each is `[mean, max, min, mean |forward step|]` of heights relative to
/// `z`, scaled by [`HEIGHT_SCALE`]. Cells past the world edge read the
/// nearest edge height.
pub fn partition_descriptors(world: &TerrainWorld, pose: Pose, z: i32) -> [Descriptor; PARTITIONS] {
    let rel = |f: i64, l: i64| {
        let (x, y) = pose.offset(f, l);
        (world.height_clamped(x, y) - z).clamp(-HEIGHT_CLAMP, HEIGHT_CLAMP)
    };
    let mut out = [[0.0; DESCRIPTOR_DIM]; PARTITIONS];
    for (d, &(f0, f1)) in DEPTH_BANDS.iter().enumerate() {
        for (s, &(l0, l1)) in LATERAL_BANDS.iter().enumerate() {
            let mut sum = 0i64;
            let mut steps = 0i64;
            let mut hi = i32::MIN;
            let mut lo = i32::MAX;
            let mut cells = 0i64;
            for f in f0..=f1 {
                for l in l0..=l1 {
                    let h = rel(f, l);
                    sum += i64::from(h);
                    steps += i64::from((h - rel(f - 1, l)).abs());
                    hi = hi.max(h);
                    lo = lo.min(h);
                    cells += 1;
                }
            }
            let n = cells as f64;
            out[d * 3 + s] = [
                sum as f64 / n / HEIGHT_SCALE,
                f64::from(hi) / HEIGHT_SCALE,
                f64::from(lo) / HEIGHT_SCALE,
                steps as f64 / n / HEIGHT_SCALE,
            ];
        }
    }
    out
}

/// Solid/empty flags around the agent, indexed `layer*9 + (f+1)*3 + (l+1)`
/// with `layer = level - (z - 1)`.
pub fn occupancy(world: &TerrainWorld, pose: Pose, z: i32) -> [f64; OCCUPANCY_DIM] {
    let mut out = [0.0; OCCUPANCY_DIM];
    for layer in 0..4 {
        let level = z - 1 + layer as i32;
        for f in -1i64..=1 {
            for l in -1i64..=1 {
                let (x, y) = pose.offset(f, l);
                if world.solid(x, y, level) {
                    out[layer * 9 + (f + 1) as usize * 3 + (l + 1) as usize] = 1.0;
                }
            }
        }
    }
    out
}

/// Full observation: codebook distances for each partition, occupancy, bias.
pub fn extract_features(
    world: &TerrainWorld,
    pose: Pose,
    codebook: &StateCollapser,
) -> Result<FeatureVector> {
    if codebook.dim() != DESCRIPTOR_DIM {
        return Err(Error::DimensionMismatch {
            expected: DESCRIPTOR_DIM,
            found: codebook.dim(),
        });
    }
    let z = world.height(pose.x, pose.y);
    let k = codebook.clusters();
    let mut features = Vec::with_capacity(feature_dim(k));
    let mut dist = Vec::with_capacity(k);
    for d in partition_descriptors(world, pose, z) {
        codebook.distances(&d, &mut dist)?;
        features.extend_from_slice(&dist);
    }
    features.extend_from_slice(&occupancy(world, pose, z));
    features.push(1.0);
    FeatureVector::new(features)
}
