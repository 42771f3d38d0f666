//! Incremental shortest-path search over a [`CostField`].
//!
//! The planner keeps two values per vertex — `g`, the settled cost-to-goal
//! estimate, and `rhs`, the one-step lookahead — plus a priority queue of all
//! locally inconsistent vertices (`g != rhs`). Plans are repaired rather than
//! recomputed when voxel costs change or the start moves: only vertices made
//! inconsistent by the change are touched, and a heuristic offset accumulated
//! on start motion keeps stale queue priorities valid as lower bounds.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use thiserror::Error;

use crate::grid::{neighbors, GridBounds, GridIndex, GridMeta, VoxelState};
use crate::riskfield::{CostConfig, CostField};
use crate::scalar::{cast, Real};

/// Tolerance for queue-key comparisons. Keys closer than this are treated as
/// equal, which avoids re-expansion churn from accumulated floating error.
pub const KEY_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("start voxel {0} is occupied")]
    OccupiedStart(GridIndex),
    #[error("goal voxel {0} is occupied")]
    OccupiedGoal(GridIndex),
    #[error("voxel {0} is outside the search bounds")]
    OutOfBounds(GridIndex),
    #[error("voxels {0} and {1} are not lattice neighbors")]
    NotNeighbors(GridIndex, GridIndex),
}

/// Cost of traversing the edge between two lattice neighbors: step length
/// times the mean of the endpoint voxel costs. Impassable (infinite) if
/// either endpoint is occupied under an impassable occupied cost.
pub fn edge_cost<S: Real>(cf: &CostField<S>, u: GridIndex, v: GridIndex) -> Result<S, PlanError> {
    match crate::grid::step_length::<S>(u, v) {
        Some(step) => Ok(edge_cost_with_step(cf, u, v, step)),
        None => Err(PlanError::NotNeighbors(u, v)),
    }
}

pub(crate) fn edge_cost_with_step<S: Real>(
    cf: &CostField<S>,
    u: GridIndex,
    v: GridIndex,
    step: S,
) -> S {
    let two = cast::<S>(2.0);
    step * (cf.total_cost(u) + cf.total_cost(v)) / two
}

/// Admissible heuristic: Euclidean voxel distance scaled by the free cost,
/// the global minimum per-unit-length traversal cost.
pub fn heuristic<S: Real>(config: &CostConfig<S>, a: GridIndex, b: GridIndex) -> S {
    a.distance::<S>(b) * config.free()
}

/// Two-component queue priority, ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueKey<S> {
    pub k1: S,
    pub k2: S,
}

impl<S: Real> QueueKey<S> {
    fn lt_eps(&self, other: &Self, eps: S) -> bool {
        if self.k1 + eps < other.k1 {
            return true;
        }
        if self.k1 < other.k1 + eps {
            return self.k2 + eps < other.k2;
        }
        false
    }

    fn exact_cmp(&self, other: &Self) -> Ordering {
        self.k1
            .partial_cmp(&other.k1)
            .expect("queue keys are never NaN")
            .then(
                self.k2
                    .partial_cmp(&other.k2)
                    .expect("queue keys are never NaN"),
            )
    }
}

#[derive(Debug, Clone, Copy)]
struct VertexState<S> {
    g: S,
    rhs: S,
    queued: Option<QueueKey<S>>,
}

impl<S: Real> Default for VertexState<S> {
    fn default() -> Self {
        Self {
            g: S::infinity(),
            rhs: S::infinity(),
            queued: None,
        }
    }
}

/// Heap entry; min-ordered by key, ties broken by index for determinism.
struct HeapEntry<S> {
    key: QueueKey<S>,
    idx: GridIndex,
}

impl<S: Real> PartialEq for HeapEntry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Real> Eq for HeapEntry<S> {}
impl<S: Real> PartialOrd for HeapEntry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Real> Ord for HeapEntry<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want the smallest key on top
        other
            .key
            .exact_cmp(&self.key)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// A planned path: ordered voxel indices from start to goal, every
/// consecutive pair lattice neighbors, with the summed edge cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<S> {
    pub indices: Vec<GridIndex>,
    pub total_cost: S,
}

impl<S: Real> Path<S> {
    /// Number of steps (edges) along the path.
    pub fn step_count(&self) -> usize {
        self.indices.len().saturating_sub(1)
    }

    /// Sum of step lengths, in voxel units.
    pub fn length_voxels(&self) -> S {
        self.indices
            .windows(2)
            .map(|w| crate::grid::step_length::<S>(w[0], w[1]).expect("consecutive lattice steps"))
            .fold(S::zero(), |a, b| a + b)
    }

    /// World-coordinate polyline through the voxel centers.
    pub fn world_points(&self, meta: &GridMeta<S>) -> Vec<[S; 3]> {
        self.indices
            .iter()
            .map(|&i| meta.index_to_world(i))
            .collect()
    }
}

/// Incremental planner state for one start/goal pair over one cost field.
///
/// The cost field is passed to each operation; callers must keep handing in
/// the same field they constructed the planner with, updated only through
/// the change-notification protocol.
pub struct PlannerCore<S: Real> {
    start: GridIndex,
    goal: GridIndex,
    km: S,
    vertices: HashMap<GridIndex, VertexState<S>>,
    heap: BinaryHeap<HeapEntry<S>>,
    bounds: Option<GridBounds>,
    eps: S,
}

impl<S: Real> PlannerCore<S> {
    /// Set up a search from `start` to `goal`. Either voxel being occupied is
    /// an error and leaves no planner behind. `bounds`, when given, restricts
    /// the vertex universe to a finite box (both endpoints must lie inside).
    pub fn new(
        cf: &CostField<S>,
        start: GridIndex,
        goal: GridIndex,
        bounds: Option<GridBounds>,
    ) -> Result<Self, PlanError> {
        if cf.grid().get_state(start) == VoxelState::Occupied {
            return Err(PlanError::OccupiedStart(start));
        }
        if cf.grid().get_state(goal) == VoxelState::Occupied {
            return Err(PlanError::OccupiedGoal(goal));
        }
        if let Some(b) = bounds {
            if !b.contains(start) {
                return Err(PlanError::OutOfBounds(start));
            }
            if !b.contains(goal) {
                return Err(PlanError::OutOfBounds(goal));
            }
        }
        let mut planner = Self {
            start,
            goal,
            km: S::zero(),
            vertices: HashMap::new(),
            heap: BinaryHeap::new(),
            bounds,
            eps: cast(KEY_EPSILON),
        };
        planner.vertices.insert(
            goal,
            VertexState {
                g: S::infinity(),
                rhs: S::zero(),
                queued: None,
            },
        );
        let key = planner.calculate_key(cf, goal);
        planner.queue_insert(goal, key);
        Ok(planner)
    }

    pub fn start(&self) -> GridIndex {
        self.start
    }

    pub fn goal(&self) -> GridIndex {
        self.goal
    }

    pub fn bounds(&self) -> Option<GridBounds> {
        self.bounds
    }

    /// Settled cost-to-goal estimate of a vertex (`+inf` if unvisited).
    pub fn cost_to_goal(&self, idx: GridIndex) -> S {
        self.vertex(idx).g
    }

    fn vertex(&self, idx: GridIndex) -> VertexState<S> {
        self.vertices.get(&idx).copied().unwrap_or_default()
    }

    fn vertex_mut(&mut self, idx: GridIndex) -> &mut VertexState<S> {
        self.vertices.entry(idx).or_default()
    }

    fn in_bounds(&self, idx: GridIndex) -> bool {
        self.bounds.is_none_or(|b| b.contains(idx))
    }

    fn calculate_key(&self, cf: &CostField<S>, idx: GridIndex) -> QueueKey<S> {
        let v = self.vertex(idx);
        let m = v.g.min(v.rhs);
        QueueKey {
            k1: m + heuristic(cf.config(), self.start, idx) + self.km,
            k2: m,
        }
    }

    fn queue_insert(&mut self, idx: GridIndex, key: QueueKey<S>) {
        self.vertex_mut(idx).queued = Some(key);
        self.heap.push(HeapEntry { key, idx });
    }

    fn queue_remove(&mut self, idx: GridIndex) {
        self.vertex_mut(idx).queued = None;
        // stale heap entries are discarded lazily on pop
    }

    /// Restore queue membership for one vertex: queued iff inconsistent.
    fn update_vertex(&mut self, cf: &CostField<S>, idx: GridIndex) {
        let v = self.vertex(idx);
        let inconsistent = v.g != v.rhs;
        match (inconsistent, v.queued) {
            (true, _) => {
                let key = self.calculate_key(cf, idx);
                self.queue_insert(idx, key);
            }
            (false, Some(_)) => self.queue_remove(idx),
            (false, None) => {}
        }
    }

    /// Valid top of the queue, skipping entries whose key is out of date.
    fn peek_valid(&mut self) -> Option<(QueueKey<S>, GridIndex)> {
        while let Some(top) = self.heap.peek() {
            let current = self.vertex(top.idx).queued;
            if current == Some(top.key) {
                return Some((top.key, top.idx));
            }
            self.heap.pop();
        }
        None
    }

    /// Recompute `rhs` of a vertex from scratch over its successors.
    fn recompute_rhs(&mut self, cf: &CostField<S>, idx: GridIndex) {
        if idx == self.goal {
            return;
        }
        let mut best = S::infinity();
        for (n, step) in neighbors::<S>(idx, cf.mode()) {
            if !self.in_bounds(n) {
                continue;
            }
            let c = edge_cost_with_step(cf, idx, n, step);
            let cand = c + self.vertex(n).g;
            if cand < best {
                best = cand;
            }
        }
        self.vertex_mut(idx).rhs = best;
    }

    /// Drive the queue until the start vertex is locally consistent (or
    /// provably unreachable). The core repair loop.
    fn compute_shortest_path(&mut self, cf: &CostField<S>) {
        while let Some((top_key, u)) = self.peek_valid() {
            let start_v = self.vertex(self.start);
            let start_key = self.calculate_key(cf, self.start);
            if !(top_key.lt_eps(&start_key, self.eps) || start_v.rhs != start_v.g) {
                break;
            }
            let new_key = self.calculate_key(cf, u);
            if top_key.lt_eps(&new_key, self.eps) {
                // priority became stale (start moved); refresh and retry
                self.queue_insert(u, new_key);
                continue;
            }
            let v = self.vertex(u);
            if v.g > v.rhs {
                // settle: best known value is final for the current costs
                let rhs = v.rhs;
                self.vertex_mut(u).g = rhs;
                self.queue_remove(u);
                let g_u = rhs;
                for (p, step) in neighbors::<S>(u, cf.mode()) {
                    if !self.in_bounds(p) {
                        continue;
                    }
                    if p != self.goal {
                        let cand = edge_cost_with_step(cf, p, u, step) + g_u;
                        if cand < self.vertex(p).rhs {
                            self.vertex_mut(p).rhs = cand;
                        }
                    }
                    self.update_vertex(cf, p);
                }
            } else {
                // cost increase invalidated this vertex; re-derive it and
                // everything that may have depended on it
                self.vertex_mut(u).g = S::infinity();
                self.recompute_rhs(cf, u);
                self.update_vertex(cf, u);
                let succs: Vec<GridIndex> = neighbors::<S>(u, cf.mode())
                    .map(|(p, _)| p)
                    .filter(|p| self.in_bounds(*p))
                    .collect();
                for p in succs {
                    self.recompute_rhs(cf, p);
                    self.update_vertex(cf, p);
                }
            }
        }
    }

    /// Plan (or repair) and extract the current minimum-cost path. Returns
    /// `None` when the goal is unreachable from the start.
    pub fn compute_path(&mut self, cf: &CostField<S>) -> Option<Path<S>> {
        self.compute_shortest_path(cf);
        if self.start == self.goal {
            return Some(Path {
                indices: vec![self.start],
                total_cost: S::zero(),
            });
        }
        if !self.vertex(self.start).g.is_finite() {
            return None;
        }
        let mut indices = vec![self.start];
        let mut visited: std::collections::HashSet<GridIndex> = std::collections::HashSet::new();
        visited.insert(self.start);
        let mut total = S::zero();
        let mut cur = self.start;
        while cur != self.goal {
            let mut best: Option<(S, GridIndex, S)> = None;
            for (n, step) in neighbors::<S>(cur, cf.mode()) {
                if !self.in_bounds(n) {
                    continue;
                }
                let c = edge_cost_with_step(cf, cur, n, step);
                let score = c + self.vertex(n).g;
                if !score.is_finite() {
                    continue;
                }
                // strict 'less than' keeps the first neighbor on ties, so the
                // deterministic neighbor order decides
                if best.is_none_or(|(b, _, _)| score < b) {
                    best = Some((score, n, c));
                }
            }
            let (_, next, c) = best.expect("finite start value implies a finite successor");
            assert!(
                visited.insert(next),
                "cycle during path extraction at {next}"
            );
            total += c;
            indices.push(next);
            cur = next;
        }
        Some(Path {
            indices,
            total_cost: total,
        })
    }

    /// Repair the search after voxel cost changes. `changed` must be the set
    /// of voxels whose total cost changed (as returned by
    /// [`CostField::apply_changes`]); every edge incident to one of them is
    /// re-evaluated.
    pub fn notify_changes(
        &mut self,
        cf: &CostField<S>,
        changed: impl IntoIterator<Item = GridIndex>,
    ) {
        let mut affected: BTreeSet<GridIndex> = BTreeSet::new();
        for idx in changed {
            if self.in_bounds(idx) {
                affected.insert(idx);
            }
            for (n, _) in neighbors::<S>(idx, cf.mode()) {
                if self.in_bounds(n) {
                    affected.insert(n);
                }
            }
        }
        for u in affected {
            self.recompute_rhs(cf, u);
            self.update_vertex(cf, u);
        }
    }

    /// Reassign the start vertex, accumulating the heuristic offset that
    /// keeps queued priorities valid lower bounds.
    pub fn move_start(&mut self, cf: &CostField<S>, new_start: GridIndex) -> Result<(), PlanError> {
        if new_start == self.start {
            return Ok(());
        }
        if cf.grid().get_state(new_start) == VoxelState::Occupied {
            return Err(PlanError::OccupiedStart(new_start));
        }
        if !self.in_bounds(new_start) {
            return Err(PlanError::OutOfBounds(new_start));
        }
        self.km += heuristic(cf.config(), self.start, new_start);
        self.start = new_start;
        Ok(())
    }

    /// Verify the queue discipline: a vertex is queued exactly when it is
    /// locally inconsistent. Used by tests to detect state corruption.
    pub fn check_queue_discipline(&self) -> Result<(), String> {
        for (idx, v) in &self.vertices {
            let inconsistent = v.g != v.rhs;
            if inconsistent && v.queued.is_none() {
                return Err(format!("inconsistent vertex {idx} missing from queue"));
            }
            if !inconsistent && v.queued.is_some() {
                return Err(format!("consistent vertex {idx} still queued"));
            }
        }
        Ok(())
    }

    /// Test hook: additively perturb the stored `g` of a vertex without
    /// touching the queue. Corrupts the planner by design.
    #[doc(hidden)]
    pub fn debug_perturb_g(&mut self, idx: GridIndex, delta: S) {
        let v = self.vertex_mut(idx);
        v.g += delta;
    }
}

impl<S: Real> std::fmt::Debug for PlannerCore<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlannerCore")
            .field("start", &self.start)
            .field("goal", &self.goal)
            .field("km", &self.km)
            .field("vertices", &self.vertices.len())
            .finish()
    }
}
