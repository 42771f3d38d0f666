//! Brute-force reference implementations used to cross-check the planner and
//! the risk field: plain Dijkstra over the explicit bounded graph, and an
//! exhaustive truncated distance transform. Deliberately simple; shipped in
//! the library so the CLI can verify results on user maps.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::grid::{neighbors, GridBounds, GridIndex, VoxelGrid, VoxelState};
use crate::planner::edge_cost_with_step;
use crate::riskfield::{euclid, CostField};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("voxel {0} lies outside the oracle bounds")]
    OutOfBounds(GridIndex),
}

/// Exact single-source result over the bounded graph.
#[derive(Debug, Clone)]
pub struct OracleResult<S> {
    /// Optimal cost to the goal, or `None` when unreachable.
    pub cost: Option<S>,
    /// One optimal start-to-goal path, when reachable.
    pub path: Option<Vec<GridIndex>>,
    /// Settled distance from the start for every reached vertex.
    pub distances: HashMap<GridIndex, S>,
}

struct QueueItem<S> {
    dist: S,
    idx: GridIndex,
}

impl<S: Real> PartialEq for QueueItem<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Real> Eq for QueueItem<S> {}
impl<S: Real> PartialOrd for QueueItem<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Real> Ord for QueueItem<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap with deterministic index tie-break
        other
            .dist
            .partial_cmp(&self.dist)
            .expect("distances are never NaN")
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Dijkstra over the voxels inside `bounds`, using the planner's edge costs.
pub fn dijkstra<S: Real>(
    cf: &CostField<S>,
    bounds: GridBounds,
    start: GridIndex,
    goal: GridIndex,
) -> Result<OracleResult<S>, OracleError> {
    if !bounds.contains(start) {
        return Err(OracleError::OutOfBounds(start));
    }
    if !bounds.contains(goal) {
        return Err(OracleError::OutOfBounds(goal));
    }

    let mut dist: HashMap<GridIndex, S> = HashMap::new();
    let mut parent: HashMap<GridIndex, GridIndex> = HashMap::new();
    let mut heap = BinaryHeap::new();

    // endpoints on occupied voxels are unreachable by definition, matching
    // the planner's endpoint rule even under a finite occupied cost
    let endpoint_blocked = |idx: GridIndex| cf.grid().get_state(idx) == VoxelState::Occupied;
    if !endpoint_blocked(start) {
        dist.insert(start, S::zero());
        heap.push(QueueItem {
            dist: S::zero(),
            idx: start,
        });
    }

    while let Some(QueueItem { dist: d, idx: u }) = heap.pop() {
        match dist.get(&u) {
            Some(&best) if best < d => continue,
            _ => {}
        }
        for (v, step) in neighbors::<S>(u, cf.mode()) {
            if !bounds.contains(v) {
                continue;
            }
            let w = edge_cost_with_step(cf, u, v, step);
            if !w.is_finite() {
                continue;
            }
            let cand = d + w;
            let improved = match dist.get(&v) {
                Some(&cur) => cand < cur,
                None => true,
            };
            if improved {
                dist.insert(v, cand);
                parent.insert(v, u);
                heap.push(QueueItem { dist: cand, idx: v });
            }
        }
    }

    let cost = if endpoint_blocked(goal) {
        None
    } else {
        dist.get(&goal).copied()
    };
    let path = cost.map(|_| {
        let mut chain = vec![goal];
        let mut cur = goal;
        while cur != start {
            cur = parent[&cur];
            chain.push(cur);
        }
        chain.reverse();
        chain
    });
    Ok(OracleResult {
        cost,
        path,
        distances: dist,
    })
}

/// Exhaustive truncated Euclidean distance transform: for every non-occupied
/// voxel inside `bounds`, the exact distance to the nearest occupied voxel
/// anywhere in the grid; entries farther than `radius` are omitted.
pub fn distance_transform<S: Real>(
    grid: &VoxelGrid<S>,
    radius: i32,
    bounds: GridBounds,
) -> HashMap<GridIndex, S> {
    let occupied: Vec<GridIndex> = grid.occupied_voxels().collect();
    let mut out = HashMap::new();
    if radius <= 0 || occupied.is_empty() {
        return out;
    }
    let cap = (radius as i64) * (radius as i64);
    for v in bounds.iter() {
        if grid.get_state(v) == VoxelState::Occupied {
            continue;
        }
        let mut best: Option<i64> = None;
        for o in &occupied {
            let dsq = v.dist_sq(*o);
            if best.is_none_or(|b| dsq < b) {
                best = Some(dsq);
            }
        }
        if let Some(dsq) = best {
            if dsq <= cap {
                out.insert(v, euclid::<S>(dsq));
            }
        }
    }
    out
}
