//! Shared helpers for the integration suites: seeded random worlds and
//! reachable endpoint sampling.

use gridplan::grid::{GridBounds, GridIndex, GridMeta, GridMode, VoxelGrid, VoxelState};
use gridplan::oracle;
use gridplan::riskfield::{CostConfig, CostField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Independent per-voxel states: 60% free, 25% unknown, 15% occupied.
pub fn random_state(rng: &mut ChaCha8Rng) -> VoxelState {
    let roll: f64 = rng.gen();
    if roll < 0.60 {
        VoxelState::Free
    } else if roll < 0.85 {
        VoxelState::Unknown
    } else {
        VoxelState::Occupied
    }
}

pub fn random_grid(
    rng: &mut ChaCha8Rng,
    extent: [i32; 3],
    mode: GridMode,
) -> (VoxelGrid<f64>, GridBounds) {
    let meta = GridMeta::new(1.0, [0.0; 3], mode);
    let mut grid = VoxelGrid::new(meta).unwrap();
    let bounds = GridBounds::new(
        GridIndex::new(0, 0, 0),
        GridIndex::new(extent[0] - 1, extent[1] - 1, extent[2] - 1),
    );
    for idx in bounds.iter() {
        grid.set_state(idx, random_state(rng)).unwrap();
    }
    (grid, bounds)
}

/// Random cost regime: unknown cost in [2, 100], risk radius in {0..=3}.
pub fn random_config(rng: &mut ChaCha8Rng) -> CostConfig<f64> {
    let cu: f64 = rng.gen_range(2.0..=100.0);
    let r: i32 = rng.gen_range(0..=3);
    CostConfig::new(1.0, cu, f64::INFINITY, r).unwrap()
}

pub fn random_non_occupied(
    rng: &mut ChaCha8Rng,
    field: &CostField<f64>,
    bounds: GridBounds,
) -> Option<GridIndex> {
    for _ in 0..200 {
        let idx = GridIndex::new(
            rng.gen_range(bounds.min.x..=bounds.max.x),
            rng.gen_range(bounds.min.y..=bounds.max.y),
            rng.gen_range(bounds.min.z..=bounds.max.z),
        );
        if field.grid().get_state(idx) != VoxelState::Occupied {
            return Some(idx);
        }
    }
    None
}

/// Sample a random start and a goal reachable from it, along with the
/// oracle's optimal cost for the pair.
pub fn random_reachable_pair(
    rng: &mut ChaCha8Rng,
    field: &CostField<f64>,
    bounds: GridBounds,
) -> Option<(GridIndex, GridIndex, f64)> {
    let start = random_non_occupied(rng, field, bounds)?;
    let sssp = oracle::dijkstra(field, bounds, start, start).ok()?;
    let mut reachable: Vec<(&GridIndex, &f64)> = sssp
        .distances
        .iter()
        .filter(|(idx, _)| **idx != start)
        .collect();
    if reachable.is_empty() {
        return None;
    }
    reachable.sort_by_key(|(idx, _)| **idx);
    let (goal, cost) = reachable[rng.gen_range(0..reachable.len())];
    Some((start, *goal, *cost))
}
