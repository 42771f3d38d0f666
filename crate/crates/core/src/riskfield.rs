//! Proximity-risk cost layer.
//!
//! Every voxel carries a base traversal cost from its state. Voxels near an
//! obstacle additionally carry a risk cost that decays with the distance to
//! the nearest occupied voxel, producing a gradient that pushes paths toward
//! the middle of narrow passages while still allowing them through.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::grid::{ChangeRecord, GridIndex, GridMode, VoxelGrid, VoxelState};
use crate::scalar::{cast, Real};

/// Traversal cost parameters.
///
/// The per-state base costs must satisfy `free < unknown < occupied`, with
/// `occupied` defaulting to an impassable sentinel (`+inf`). `risk_radius`
/// bounds, in voxels, how far an obstacle's risk reaches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostConfig<S> {
    free: S,
    unknown: S,
    occupied: S,
    risk_radius: i32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("free cost must be positive")]
    NonPositiveFreeCost,
    #[error("costs must satisfy free < unknown < occupied")]
    CostOrdering,
    #[error("risk radius must be non-negative")]
    NegativeRadius,
}

impl<S: Real> CostConfig<S> {
    pub fn new(free: S, unknown: S, occupied: S, risk_radius: i32) -> Result<Self, ConfigError> {
        if free <= S::zero() {
            return Err(ConfigError::NonPositiveFreeCost);
        }
        if !(free < unknown && unknown < occupied) {
            return Err(ConfigError::CostOrdering);
        }
        if risk_radius < 0 {
            return Err(ConfigError::NegativeRadius);
        }
        Ok(Self {
            free,
            unknown,
            occupied,
            risk_radius,
        })
    }

    pub fn free(&self) -> S {
        self.free
    }

    pub fn unknown(&self) -> S {
        self.unknown
    }

    pub fn occupied(&self) -> S {
        self.occupied
    }

    pub fn risk_radius(&self) -> i32 {
        self.risk_radius
    }

    /// Base cost of a voxel state, before risk.
    pub fn base_cost(&self, s: VoxelState) -> S {
        match s {
            VoxelState::Free => self.free,
            VoxelState::Unknown => self.unknown,
            VoxelState::Occupied => self.occupied,
        }
    }

    /// Risk cost at Euclidean distance `d` from the nearest obstacle.
    pub fn risk_at(&self, d: S) -> S {
        self.unknown / (d + S::one())
    }
}

impl<S: Real> Default for CostConfig<S> {
    fn default() -> Self {
        Self {
            free: S::one(),
            unknown: cast(50.0),
            occupied: S::infinity(),
            risk_radius: 2,
        }
    }
}

/// Distance to the nearest occupied voxel and the risk cost it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEntry<S> {
    /// Euclidean distance to the nearest occupied voxel, in voxel units.
    pub distance: S,
    /// Risk cost added to the voxel's base cost.
    pub risk: S,
}

/// A voxel grid plus its cost parameters and the derived risk table.
///
/// The risk table holds an entry for exactly those non-occupied voxels that
/// lie within `risk_radius` (Euclidean) of some occupied voxel. Mutate the
/// grid through [`CostField::grid_mut`], then hand the resulting change
/// records to [`CostField::apply_changes`] to bring the table back in sync.
pub struct CostField<S: Real> {
    grid: VoxelGrid<S>,
    config: CostConfig<S>,
    risk: HashMap<GridIndex, RiskEntry<S>>,
}

impl<S: Real> CostField<S> {
    /// Wrap a grid; builds the risk table for its current contents.
    pub fn new(grid: VoxelGrid<S>, config: CostConfig<S>) -> Self {
        let mut cf = Self {
            grid,
            config,
            risk: HashMap::new(),
        };
        cf.rebuild_full();
        cf
    }

    pub fn grid(&self) -> &VoxelGrid<S> {
        &self.grid
    }

    /// Mutable grid access. Collect the change records and pass them to
    /// [`CostField::apply_changes`]; until then the risk table is stale.
    pub fn grid_mut(&mut self) -> &mut VoxelGrid<S> {
        &mut self.grid
    }

    pub fn config(&self) -> &CostConfig<S> {
        &self.config
    }

    pub fn mode(&self) -> GridMode {
        self.grid.mode()
    }

    /// Risk entry for a voxel, if it is within reach of an obstacle.
    pub fn risk(&self, idx: GridIndex) -> Option<RiskEntry<S>> {
        self.risk.get(&idx).copied()
    }

    pub fn risk_table(&self) -> &HashMap<GridIndex, RiskEntry<S>> {
        &self.risk
    }

    /// Total traversal cost of a voxel: the occupied cost outright for
    /// occupied voxels, otherwise base cost plus risk.
    pub fn total_cost(&self, idx: GridIndex) -> S {
        let state = self.grid.get_state(idx);
        self.total_for(state, self.risk.get(&idx).copied())
    }

    fn total_for(&self, state: VoxelState, entry: Option<RiskEntry<S>>) -> S {
        if state == VoxelState::Occupied {
            return self.config.occupied;
        }
        let base = self.config.base_cost(state);
        match entry {
            Some(e) => base + e.risk,
            None => base,
        }
    }

    /// Recompute the risk table from scratch by stamping a truncated
    /// distance field around every occupied voxel.
    pub fn rebuild_full(&mut self) {
        self.risk.clear();
        let r = self.config.risk_radius;
        if r == 0 {
            return;
        }
        let offsets = ball_offsets(r, self.grid.mode());
        let mut best: HashMap<GridIndex, i64> = HashMap::new();
        let occupied: Vec<GridIndex> = self.grid.occupied_voxels().collect();
        for o in &occupied {
            for &(dx, dy, dz, dsq) in &offsets {
                let v = o.offset(dx, dy, dz);
                best.entry(v)
                    .and_modify(|cur| *cur = (*cur).min(dsq))
                    .or_insert(dsq);
            }
        }
        for (v, dsq) in best {
            if self.grid.get_state(v) == VoxelState::Occupied {
                continue;
            }
            let d = euclid::<S>(dsq);
            self.risk.insert(
                v,
                RiskEntry {
                    distance: d,
                    risk: self.config.risk_at(d),
                },
            );
        }
    }

    /// Incrementally update the risk table after the given grid changes.
    ///
    /// The changes must already be applied to the underlying grid. Returns
    /// exactly the set of voxels whose total cost differs from before the
    /// changes, in sorted order.
    pub fn apply_changes(&mut self, changes: &[ChangeRecord]) -> BTreeSet<GridIndex> {
        let r = self.config.risk_radius;
        let mode = self.grid.mode();
        // State each flipped voxel had before the batch.
        let mut old_state: HashMap<GridIndex, VoxelState> = HashMap::new();
        let mut stale: BTreeSet<GridIndex> = BTreeSet::new();
        for rec in changes {
            if !rec.is_change() {
                continue;
            }
            old_state.entry(rec.index).or_insert(rec.old);
            for (dx, dy, dz) in window_offsets(r, mode) {
                stale.insert(rec.index.offset(dx, dy, dz));
            }
        }

        let mut changed = BTreeSet::new();
        for v in stale {
            let state_now = self.grid.get_state(v);
            let state_before = old_state.get(&v).copied().unwrap_or(state_now);
            let entry_before = self.risk.get(&v).copied();
            let entry_now = self.recompute_entry(v, state_now);
            match entry_now {
                Some(e) => {
                    self.risk.insert(v, e);
                }
                None => {
                    self.risk.remove(&v);
                }
            }
            let before = self.total_for(state_before, entry_before);
            let after = self.total_for(state_now, entry_now);
            if before != after {
                changed.insert(v);
            }
        }
        changed
    }

    /// Local brute-force distance query around one voxel.
    fn recompute_entry(&self, v: GridIndex, state: VoxelState) -> Option<RiskEntry<S>> {
        if state == VoxelState::Occupied {
            return None;
        }
        let r = self.config.risk_radius;
        if r == 0 {
            return None;
        }
        let mut best: Option<i64> = None;
        for (dx, dy, dz) in window_offsets(r, self.grid.mode()) {
            let o = v.offset(dx, dy, dz);
            if self.grid.get_state(o) != VoxelState::Occupied {
                continue;
            }
            let dsq =
                (dx as i64) * (dx as i64) + (dy as i64) * (dy as i64) + (dz as i64) * (dz as i64);
            if dsq <= (r as i64) * (r as i64) {
                best = Some(best.map_or(dsq, |b| b.min(dsq)));
            }
        }
        best.map(|dsq| {
            let d = euclid::<S>(dsq);
            RiskEntry {
                distance: d,
                risk: self.config.risk_at(d),
            }
        })
    }
}

impl<S: Real> std::fmt::Debug for CostField<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CostField")
            .field("grid", &self.grid)
            .field("config", &self.config)
            .field("risk_entries", &self.risk.len())
            .finish()
    }
}

/// Euclidean length of an integer squared distance, in voxel units.
pub(crate) fn euclid<S: Real>(dist_sq: i64) -> S {
    cast((dist_sq as f64).sqrt())
}

/// Lattice offsets (excluding the origin) with Euclidean norm at most `r`.
fn ball_offsets(r: i32, mode: GridMode) -> Vec<(i32, i32, i32, i64)> {
    let mut out = Vec::new();
    let zr = match mode {
        GridMode::TwoD => 0,
        GridMode::ThreeD => r,
    };
    for dz in -zr..=zr {
        for dy in -r..=r {
            for dx in -r..=r {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                let dsq = (dx as i64) * (dx as i64)
                    + (dy as i64) * (dy as i64)
                    + (dz as i64) * (dz as i64);
                if dsq <= (r as i64) * (r as i64) {
                    out.push((dx, dy, dz, dsq));
                }
            }
        }
    }
    out
}

/// Full Chebyshev window of radius `r`, origin included.
fn window_offsets(r: i32, mode: GridMode) -> impl Iterator<Item = (i32, i32, i32)> {
    let zr = match mode {
        GridMode::TwoD => 0,
        GridMode::ThreeD => r,
    };
    (-zr..=zr).flat_map(move |dz| (-r..=r).flat_map(move |dy| (-r..=r).map(move |dx| (dx, dy, dz))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMeta;
    use approx::assert_relative_eq;

    fn field2d(config: CostConfig<f64>) -> CostField<f64> {
        let meta = GridMeta::new(1.0, [0.0; 3], GridMode::TwoD);
        CostField::new(VoxelGrid::new(meta).unwrap(), config)
    }

    fn occupy(cf: &mut CostField<f64>, idx: GridIndex) -> BTreeSet<GridIndex> {
        let rec = cf.grid_mut().set_state(idx, VoxelState::Occupied).unwrap();
        cf.apply_changes(&[rec])
    }

    #[test]
    fn config_ordering_enforced() {
        assert!(CostConfig::new(1.0, 50.0, f64::INFINITY, 2).is_ok());
        assert!(CostConfig::new(1.0, 50.0, 1000.0, 2).is_ok());
        assert_eq!(
            CostConfig::new(0.0, 50.0, f64::INFINITY, 2).unwrap_err(),
            ConfigError::NonPositiveFreeCost
        );
        assert_eq!(
            CostConfig::new(2.0, 1.0, f64::INFINITY, 2).unwrap_err(),
            ConfigError::CostOrdering
        );
        assert_eq!(
            CostConfig::new(1.0, 50.0, 40.0, 2).unwrap_err(),
            ConfigError::CostOrdering
        );
        assert_eq!(
            CostConfig::new(1.0, 50.0, f64::INFINITY, -1).unwrap_err(),
            ConfigError::NegativeRadius
        );
    }

    #[test]
    fn total_cost_zero_risk_free_voxel() {
        let mut cf = field2d(CostConfig::default());
        let rec = cf
            .grid_mut()
            .set_state(GridIndex::new(0, 0, 0), VoxelState::Free)
            .unwrap();
        cf.apply_changes(&[rec]);
        assert_eq!(cf.total_cost(GridIndex::new(0, 0, 0)), 1.0);
    }

    #[test]
    fn total_cost_adjacent_to_obstacle() {
        let mut cf = field2d(CostConfig::default());
        let recs = [
            cf.grid_mut()
                .set_state(GridIndex::new(0, 0, 0), VoxelState::Free)
                .unwrap(),
            cf.grid_mut()
                .set_state(GridIndex::new(1, 0, 0), VoxelState::Occupied)
                .unwrap(),
        ];
        cf.apply_changes(&recs);
        // d = 1: 1 + 50/2
        assert_relative_eq!(cf.total_cost(GridIndex::new(0, 0, 0)), 26.0);
        // d = sqrt(2): 1 + 50/(sqrt(2)+1)
        let rec = cf
            .grid_mut()
            .set_state(GridIndex::new(0, 1, 0), VoxelState::Free)
            .unwrap();
        cf.apply_changes(&[rec]);
        assert_relative_eq!(
            cf.total_cost(GridIndex::new(0, 1, 0)),
            1.0 + 50.0 / (2f64.sqrt() + 1.0),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cf.total_cost(GridIndex::new(0, 1, 0)),
            21.710678118654755,
            epsilon = 1e-9
        );
    }

    #[test]
    fn risk_applies_to_unknown_voxels() {
        let mut cf = field2d(CostConfig::default());
        occupy(&mut cf, GridIndex::new(0, 0, 0));
        // (2, 0, 0) is untouched (Unknown) at d = 2: 50 + 50/3
        assert_relative_eq!(
            cf.total_cost(GridIndex::new(2, 0, 0)),
            50.0 + 50.0 / 3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn occupied_cost_is_sentinel() {
        let mut cf = field2d(CostConfig::default());
        occupy(&mut cf, GridIndex::new(0, 0, 0));
        assert!(cf.total_cost(GridIndex::new(0, 0, 0)).is_infinite());
        assert!(cf.risk(GridIndex::new(0, 0, 0)).is_none());
    }

    #[test]
    fn single_obstacle_ring_r2() {
        let mut cf = field2d(CostConfig::default());
        occupy(&mut cf, GridIndex::new(0, 0, 0));
        // offsets with x^2 + y^2 <= 4, excluding the obstacle itself
        assert_eq!(cf.risk_table().len(), 12);
        let mut by_d = [0usize; 3];
        for e in cf.risk_table().values() {
            if e.distance == 1.0 {
                by_d[0] += 1;
            } else if (e.distance - 2f64.sqrt()).abs() < 1e-12 {
                by_d[1] += 1;
            } else if e.distance == 2.0 {
                by_d[2] += 1;
            } else {
                panic!("unexpected distance {}", e.distance);
            }
        }
        assert_eq!(by_d, [4, 4, 4]);
    }

    #[test]
    fn empty_grid_has_empty_risk_table() {
        let cf = field2d(CostConfig::default());
        assert!(cf.risk_table().is_empty());
    }

    #[test]
    fn fully_occupied_block_has_empty_risk_table() {
        let meta = GridMeta::new(1.0, [0.0; 3], GridMode::TwoD);
        let mut grid = VoxelGrid::new(meta).unwrap();
        for y in 0..3 {
            for x in 0..3 {
                grid.set_state(GridIndex::new(x, y, 0), VoxelState::Occupied)
                    .unwrap();
            }
        }
        let cf = CostField::new(grid, CostConfig::new(1.0, 50.0, f64::INFINITY, 1).unwrap());
        // every in-range voxel of the 3x3 block is itself occupied, but the
        // ring around the block is in range of its boundary
        for y in 0..3 {
            for x in 0..3 {
                assert!(cf.risk(GridIndex::new(x, y, 0)).is_none());
            }
        }
    }

    #[test]
    fn occupying_one_voxel_reports_itself_plus_ring() {
        let mut cf = field2d(CostConfig::default());
        let changed = occupy(&mut cf, GridIndex::new(5, 5, 0));
        assert_eq!(changed.len(), 13);
        assert!(changed.contains(&GridIndex::new(5, 5, 0)));
        for idx in &changed {
            if *idx != GridIndex::new(5, 5, 0) {
                assert!(idx.dist_sq(GridIndex::new(5, 5, 0)) <= 4);
            }
        }
    }

    #[test]
    fn freeing_reattaches_to_surviving_obstacle() {
        let mut cf = field2d(CostConfig::default());
        occupy(&mut cf, GridIndex::new(0, 0, 0));
        occupy(&mut cf, GridIndex::new(3, 0, 0));
        let rec = cf
            .grid_mut()
            .set_state(GridIndex::new(0, 0, 0), VoxelState::Free)
            .unwrap();
        cf.apply_changes(&[rec]);

        let mut oracle = CostField::new(cf.grid().clone(), *cf.config());
        oracle.rebuild_full();
        assert_tables_equal(&cf, &oracle);
        // the freed voxel now carries risk from the survivor at d = 3 > r: none
        assert!(cf.risk(GridIndex::new(0, 0, 0)).is_none());
        // (2, 0) sits at d = 1 from the survivor
        assert_eq!(cf.risk(GridIndex::new(2, 0, 0)).unwrap().distance, 1.0);
    }

    #[test]
    fn base_only_change_far_from_obstacles() {
        let mut cf = field2d(CostConfig::default());
        let rec = cf
            .grid_mut()
            .set_state(GridIndex::new(50, 50, 0), VoxelState::Free)
            .unwrap();
        cf.apply_changes(&[rec]);
        let rec = cf
            .grid_mut()
            .set_state(GridIndex::new(50, 50, 0), VoxelState::Unknown)
            .unwrap();
        let changed = cf.apply_changes(&[rec]);
        assert_eq!(changed.len(), 1);
        assert!(changed.contains(&GridIndex::new(50, 50, 0)));
    }

    #[test]
    fn gradient_decreases_away_from_obstacle() {
        let mut cf = field2d(CostConfig::new(1.0, 50.0, f64::INFINITY, 4).unwrap());
        occupy(&mut cf, GridIndex::new(0, 0, 0));
        let mut prev = f64::INFINITY;
        for x in 1..=4 {
            let e = cf.risk(GridIndex::new(x, 0, 0)).unwrap();
            assert!(e.risk < prev, "risk must strictly decrease with distance");
            assert!(e.risk > 0.0);
            assert!(e.risk <= 50.0);
            prev = e.risk;
        }
        assert!(cf.risk(GridIndex::new(5, 0, 0)).is_none());
    }

    #[test]
    fn cost_ordering_holds_for_zero_risk_voxels() {
        let mut cf = field2d(CostConfig::default());
        let rec = cf
            .grid_mut()
            .set_state(GridIndex::new(0, 0, 0), VoxelState::Free)
            .unwrap();
        cf.apply_changes(&[rec]);
        let free = cf.total_cost(GridIndex::new(0, 0, 0));
        let unknown = cf.total_cost(GridIndex::new(20, 20, 0));
        let rec = cf
            .grid_mut()
            .set_state(GridIndex::new(40, 40, 0), VoxelState::Occupied)
            .unwrap();
        cf.apply_changes(&[rec]);
        let occupied = cf.total_cost(GridIndex::new(40, 40, 0));
        assert!(free < unknown && unknown < occupied);
    }

    pub(crate) fn assert_tables_equal(a: &CostField<f64>, b: &CostField<f64>) {
        assert_eq!(a.risk_table().len(), b.risk_table().len());
        for (idx, ea) in a.risk_table() {
            let eb = b
                .risk_table()
                .get(idx)
                .unwrap_or_else(|| panic!("missing entry at {idx}"));
            assert!(
                (ea.distance - eb.distance).abs() < 1e-9,
                "distance mismatch at {idx}"
            );
            assert!((ea.risk - eb.risk).abs() < 1e-9, "risk mismatch at {idx}");
        }
    }
}
