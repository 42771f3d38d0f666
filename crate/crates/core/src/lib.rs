//! Risk-aware incremental path planning over dynamic three-state voxel grids.
//!
//! The building blocks, bottom up:
//!
//! * [`grid`] — an unbounded, chunked voxel lattice where every voxel is
//!   free, unknown, or occupied and untouched space reads as unknown.
//! * [`riskfield`] — per-voxel traversal costs: a base cost per state plus a
//!   proximity risk that decays with distance to the nearest obstacle,
//!   maintained incrementally as the map changes.
//! * [`planner`] — incremental heuristic search over the cost field that
//!   repairs existing plans under map changes and robot motion instead of
//!   replanning from scratch.
//! * [`oracle`] — brute-force Dijkstra and distance-transform references used
//!   to verify the fast paths.
//! * [`mapio`] — occupancy-image and voxel text formats, update streams, and
//!   path/costmap export.
//! * [`replay`] — a simulator that reveals a ground-truth world to a moving
//!   robot through a line-of-sight sensor model and collects metrics.
//!
//! All cost arithmetic is generic over the floating-point scalar via
//! [`scalar::Real`]; the `*32`/`*64` aliases below pin the common choices.

pub mod grid;
pub mod mapio;
pub mod oracle;
pub mod planner;
pub mod replay;
pub mod riskfield;
pub mod scalar;

pub use grid::{
    neighbors, ChangeRecord, GridBounds, GridError, GridIndex, GridMeta, GridMode, VoxelGrid,
    VoxelState,
};
pub use mapio::{MapDocument, MapIoError, UpdateEvent, UpdateStream};
pub use oracle::OracleResult;
pub use planner::{edge_cost, heuristic, Path, PlanError, PlannerCore};
pub use replay::{Outcome, ReplayTrace, RevealScenario, ScenarioError};
pub use riskfield::{ConfigError, CostConfig, CostField, RiskEntry};
pub use scalar::Real;

pub type GridMeta32 = GridMeta<f32>;
pub type GridMeta64 = GridMeta<f64>;
pub type VoxelGrid32 = VoxelGrid<f32>;
pub type VoxelGrid64 = VoxelGrid<f64>;
pub type CostConfig32 = CostConfig<f32>;
pub type CostConfig64 = CostConfig<f64>;
pub type CostField32 = CostField<f32>;
pub type CostField64 = CostField<f64>;
pub type PlannerCore32 = PlannerCore<f32>;
pub type PlannerCore64 = PlannerCore<f64>;
pub type Path32 = Path<f32>;
pub type Path64 = Path<f64>;
pub type MapDocument32 = MapDocument<f32>;
pub type MapDocument64 = MapDocument<f64>;
pub type RevealScenario32 = RevealScenario<f32>;
pub type RevealScenario64 = RevealScenario<f64>;
