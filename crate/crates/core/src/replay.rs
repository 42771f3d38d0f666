//! Replay simulator: a ground-truth world, a line-of-sight sensor model, and
//! a simulated robot that follows the planned path while the map it plans on
//! is revealed and repaired step by step.
//!
//! Each loop iteration reveals the ground truth within sensor range of the
//! robot (occluded by occupied voxels along the lattice ray), feeds the
//! resulting changes through the cost field and the planner, recomputes the
//! path, and advances the robot one voxel along it.

use std::collections::HashSet;
use std::path::Path as FsPath;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridIndex, GridMode, VoxelGrid, VoxelState};
use crate::mapio::{self, MapDocument, MapIoError, UpdateStream};
use crate::oracle;
use crate::planner::{PlanError, PlannerCore};
use crate::riskfield::{ConfigError, CostConfig, CostField};
use crate::scalar::{cast, Real};

/// Cost tolerance below which a recomputed path does not count as a replan.
const REPLAN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("sensor radius must be at least 1, got {0}")]
    SensorRadius(i32),
    #[error("start voxel {0} outside ground-truth bounds")]
    StartOutOfBounds(GridIndex),
    #[error("goal voxel {0} outside ground-truth bounds")]
    GoalOutOfBounds(GridIndex),
    #[error("start voxel {0} is occupied in the ground truth")]
    StartOccupied(GridIndex),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Io(#[from] MapIoError),
    #[error("{path}: {msg}")]
    Malformed { path: String, msg: String },
}

/// A ground-truth world plus everything needed to replay a mission over it.
pub struct RevealScenario<S: Real> {
    pub truth: MapDocument<S>,
    /// Sensor range in voxels (Euclidean).
    pub sensor_radius: i32,
    pub start: GridIndex,
    pub goal: GridIndex,
    pub config: CostConfig<S>,
    /// When present, reveals come from this script instead of the sensor
    /// model; event `t` matches the loop step index.
    pub script: Option<UpdateStream>,
}

/// How a replay ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// The robot stands on the goal voxel.
    Reached,
    /// No path exists (or the step cap was exhausted).
    Stuck,
    /// The robot entered a ground-truth occupied voxel. Must not happen with
    /// an impassable occupied cost.
    CollisionDetected,
}

/// One loop iteration of the replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Robot voxel at the start of the step.
    pub position: [i32; 3],
    /// Whether the recomputed path cost deviated from the previous step's
    /// expectation.
    pub replanned: bool,
    /// Cost of the current path to the goal, if one exists.
    pub path_cost: Option<f64>,
}

/// Full record of one replay run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayTrace {
    pub outcome: Outcome,
    /// Sum of step lengths actually traveled, in voxel units.
    pub distance_voxels: f64,
    /// Number of steps whose recomputed path cost deviated from expectation.
    pub replans: usize,
    /// Minimum ground-truth clearance over all visited voxels, in voxel
    /// units; `None` when the world has no occupied voxel.
    pub min_clearance_voxels: Option<f64>,
    pub steps: Vec<StepRecord>,
    /// Total planning time. Excluded from determinism guarantees.
    pub compute_time_s: f64,
}

enum Expectation<S> {
    Fresh,
    Cost(S),
    Unreachable,
}

/// Run a scenario to completion.
pub fn run<S: Real>(sc: &RevealScenario<S>) -> Result<ReplayTrace, ScenarioError> {
    if sc.sensor_radius < 1 {
        return Err(ScenarioError::SensorRadius(sc.sensor_radius));
    }
    let bounds = sc.truth.bounds;
    if !bounds.contains(sc.start) {
        return Err(ScenarioError::StartOutOfBounds(sc.start));
    }
    if !bounds.contains(sc.goal) {
        return Err(ScenarioError::GoalOutOfBounds(sc.goal));
    }
    if sc.truth.grid.get_state(sc.start) == VoxelState::Occupied {
        return Err(ScenarioError::StartOccupied(sc.start));
    }

    // Step cap from the fully-known optimum; fall back to the region extent
    // when the goal is walled off in the ground truth.
    let truth_field = CostField::new(sc.truth.grid.clone(), sc.config);
    let truth_oracle = oracle::dijkstra(&truth_field, bounds, sc.start, sc.goal)
        .expect("start and goal inside bounds");
    let cap = match &truth_oracle.path {
        Some(p) => 10 * p.len().max(2),
        None => {
            let e = bounds.extent();
            10 * (e[0] + e[1] + e[2]) as usize
        }
    };

    let empty = VoxelGrid::new(*sc.truth.grid.meta()).map_err(MapIoError::from)?;
    let mut field = CostField::new(empty, sc.config);
    let mut planner = PlannerCore::new(&field, sc.start, sc.goal, Some(bounds))?;

    let mut robot = sc.start;
    let mut visited: Vec<GridIndex> = vec![robot];
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut distance = S::zero();
    let mut replans = 0usize;
    let mut expectation: Expectation<S> = Expectation::Fresh;
    let mut compute_time = Duration::ZERO;
    let tol: S = cast(REPLAN_TOLERANCE);
    let mut outcome = Outcome::Stuck;

    for step_idx in 0..=cap {
        if sc.truth.grid.get_state(robot) == VoxelState::Occupied {
            outcome = Outcome::CollisionDetected;
            break;
        }

        let records = match &sc.script {
            Some(stream) => {
                let mut recs = Vec::new();
                for event in stream.events.iter().filter(|e| e.t == step_idx as u64) {
                    for &(x, y, z, s) in &event.changes {
                        let rec = field
                            .grid_mut()
                            .set_state(GridIndex::new(x, y, z), s)
                            .map_err(MapIoError::from)?;
                        recs.push(rec);
                    }
                }
                recs
            }
            None => reveal(&sc.truth, &mut field, robot, sc.sensor_radius),
        };
        let revealed_anything = records.iter().any(|r| r.is_change());
        let changed = field.apply_changes(&records);

        let t0 = Instant::now();
        planner.notify_changes(&field, changed.iter().copied());
        let result = planner.compute_path(&field);
        compute_time += t0.elapsed();

        match result {
            Some(path) => {
                let cost = path.total_cost;
                let replanned = match expectation {
                    Expectation::Fresh => false,
                    Expectation::Cost(expected) => (cost - expected).abs() > tol,
                    Expectation::Unreachable => true,
                };
                if replanned {
                    replans += 1;
                }
                steps.push(StepRecord {
                    position: [robot.x, robot.y, robot.z],
                    replanned,
                    path_cost: Some(cost.to_f64().unwrap()),
                });
                if robot == sc.goal {
                    outcome = Outcome::Reached;
                    break;
                }
                let next = path.indices[1];
                let edge = crate::planner::edge_cost(&field, robot, next)
                    .expect("path steps are lattice neighbors");
                distance += robot.distance::<S>(next);
                robot = next;
                visited.push(robot);
                let t1 = Instant::now();
                planner.move_start(&field, next)?;
                compute_time += t1.elapsed();
                expectation = Expectation::Cost(cost - edge);
            }
            None => {
                let replanned = matches!(expectation, Expectation::Cost(_));
                if replanned {
                    replans += 1;
                }
                steps.push(StepRecord {
                    position: [robot.x, robot.y, robot.z],
                    replanned,
                    path_cost: None,
                });
                if !revealed_anything && !matches!(expectation, Expectation::Fresh) {
                    // a full reveal cycle brought no new information
                    outcome = Outcome::Stuck;
                    break;
                }
                expectation = Expectation::Unreachable;
            }
        }
    }

    Ok(ReplayTrace {
        outcome,
        distance_voxels: distance.to_f64().unwrap(),
        replans,
        min_clearance_voxels: min_clearance(&sc.truth.grid, &visited),
        steps,
        compute_time_s: compute_time.as_secs_f64(),
    })
}

/// Reveal ground-truth states within sensor range and line of sight of the
/// robot, applying them to the planner's grid.
fn reveal<S: Real>(
    truth: &MapDocument<S>,
    field: &mut CostField<S>,
    robot: GridIndex,
    radius: i32,
) -> Vec<crate::grid::ChangeRecord> {
    let mut records = Vec::new();
    let r_sq = (radius as i64) * (radius as i64);
    let zr = match truth.grid.mode() {
        GridMode::TwoD => 0,
        GridMode::ThreeD => radius,
    };
    for dz in -zr..=zr {
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let dsq = (dx as i64) * (dx as i64)
                    + (dy as i64) * (dy as i64)
                    + (dz as i64) * (dz as i64);
                if dsq > r_sq {
                    continue;
                }
                let target = robot.offset(dx, dy, dz);
                if !truth.bounds.contains(target) {
                    continue;
                }
                if !line_of_sight(&truth.grid, robot, target) {
                    continue;
                }
                let state = truth.grid.get_state(target);
                if field.grid().get_state(target) != state {
                    let rec = field
                        .grid_mut()
                        .set_state(target, state)
                        .expect("reveal writes stay on addressable layers");
                    records.push(rec);
                }
            }
        }
    }
    records
}

/// Whether `target` is visible from `eye`: no voxel strictly between them on
/// the lattice ray is occupied. The first occupied voxel a ray hits is itself
/// visible.
fn line_of_sight<S: Real>(grid: &VoxelGrid<S>, eye: GridIndex, target: GridIndex) -> bool {
    for cell in lattice_ray(eye, target) {
        if cell == eye || cell == target {
            continue;
        }
        if grid.get_state(cell) == VoxelState::Occupied {
            return false;
        }
    }
    true
}

/// Integer lattice ray from `a` to `b` (3D Bresenham along the driving
/// axis), including both endpoints. Deterministic.
fn lattice_ray(a: GridIndex, b: GridIndex) -> Vec<GridIndex> {
    let (dx, dy, dz) = (b.x - a.x, b.y - a.y, b.z - a.z);
    let (ax, ay, az) = (dx.abs(), dy.abs(), dz.abs());
    let (sx, sy, sz) = (dx.signum(), dy.signum(), dz.signum());
    let n = ax.max(ay).max(az);
    let mut cells = Vec::with_capacity(n as usize + 1);
    let (mut x, mut y, mut z) = (a.x, a.y, a.z);
    cells.push(a);
    if n == 0 {
        return cells;
    }
    if ax >= ay && ax >= az {
        let (mut ey, mut ez) = (2 * ay - ax, 2 * az - ax);
        for _ in 0..ax {
            if ey > 0 {
                y += sy;
                ey -= 2 * ax;
            }
            if ez > 0 {
                z += sz;
                ez -= 2 * ax;
            }
            ey += 2 * ay;
            ez += 2 * az;
            x += sx;
            cells.push(GridIndex::new(x, y, z));
        }
    } else if ay >= ax && ay >= az {
        let (mut ex, mut ez) = (2 * ax - ay, 2 * az - ay);
        for _ in 0..ay {
            if ex > 0 {
                x += sx;
                ex -= 2 * ay;
            }
            if ez > 0 {
                z += sz;
                ez -= 2 * ay;
            }
            ex += 2 * ax;
            ez += 2 * az;
            y += sy;
            cells.push(GridIndex::new(x, y, z));
        }
    } else {
        let (mut ex, mut ey) = (2 * ax - az, 2 * ay - az);
        for _ in 0..az {
            if ex > 0 {
                x += sx;
                ex -= 2 * az;
            }
            if ey > 0 {
                y += sy;
                ey -= 2 * az;
            }
            ex += 2 * ax;
            ey += 2 * ay;
            z += sz;
            cells.push(GridIndex::new(x, y, z));
        }
    }
    cells
}

/// Minimum Euclidean distance from any visited voxel to any ground-truth
/// occupied voxel, in voxel units.
fn min_clearance<S: Real>(truth: &VoxelGrid<S>, visited: &[GridIndex]) -> Option<f64> {
    let occupied: Vec<GridIndex> = truth.occupied_voxels().collect();
    if occupied.is_empty() {
        return None;
    }
    let unique: HashSet<GridIndex> = visited.iter().copied().collect();
    let mut best = i64::MAX;
    for v in unique {
        for o in &occupied {
            best = best.min(v.dist_sq(*o));
        }
    }
    Some((best as f64).sqrt())
}

/// Five-line deterministic summary of a trace. The compute-time line is the
/// only part that varies between runs of the same scenario.
pub fn metrics_report(tr: &ReplayTrace) -> String {
    let outcome = match tr.outcome {
        Outcome::Reached => "Reached",
        Outcome::Stuck => "Stuck",
        Outcome::CollisionDetected => "CollisionDetected",
    };
    let clearance = match tr.min_clearance_voxels {
        Some(c) => format!("{c:.6}"),
        None => "inf".to_string(),
    };
    format!(
        "outcome: {outcome}\ndistance_voxels: {:.6}\nreplans: {}\nmin_clearance_voxels: {clearance}\ncompute_time_s: {:.6}\n",
        tr.distance_voxels, tr.replans, tr.compute_time_s
    )
}

/// Write a trace as pretty JSON (the `compute_time_s` field is the only
/// nondeterministic part).
pub fn save_trace(tr: &ReplayTrace, path: impl AsRef<FsPath>) -> Result<(), MapIoError> {
    let mut text = serde_json::to_string_pretty(tr).expect("trace serializes");
    text.push('\n');
    std::fs::write(path.as_ref(), text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// scenario files

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    #[serde(default)]
    map3d: Option<String>,
    #[serde(default)]
    image: Option<String>,
    #[serde(default)]
    meta: Option<String>,
    sensor_radius: i32,
    start: [i32; 3],
    goal: [i32; 3],
    #[serde(default)]
    costs: Option<CostsFile>,
    #[serde(default)]
    updates: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CostsFile {
    #[serde(default = "default_free")]
    free: f64,
    #[serde(default = "default_unknown")]
    unknown: f64,
    /// `null` or absent means impassable.
    #[serde(default)]
    occupied: Option<f64>,
    #[serde(default = "default_radius")]
    risk_radius: i32,
}

fn default_free() -> f64 {
    1.0
}
fn default_unknown() -> f64 {
    50.0
}
fn default_radius() -> i32 {
    2
}

/// Load a scenario document; map and update paths resolve relative to the
/// scenario file's directory.
pub fn load_scenario<S: Real>(
    path: impl AsRef<FsPath>,
) -> Result<RevealScenario<S>, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(MapIoError::from)?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| ScenarioError::Malformed {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    let dir = path.parent().unwrap_or_else(|| FsPath::new("."));
    let truth = match (&file.map3d, &file.image, &file.meta) {
        (Some(m), None, None) => mapio::load_grid3d::<S>(dir.join(m))?,
        (None, Some(img), Some(meta)) => mapio::load_grid2d::<S>(dir.join(img), dir.join(meta))?,
        _ => {
            return Err(ScenarioError::Malformed {
                path: path.display().to_string(),
                msg: "scenario needs either 'map3d' or both 'image' and 'meta'".to_string(),
            })
        }
    };
    let costs = file.costs.unwrap_or(CostsFile {
        free: default_free(),
        unknown: default_unknown(),
        occupied: None,
        risk_radius: default_radius(),
    });
    let config = CostConfig::new(
        cast::<S>(costs.free),
        cast::<S>(costs.unknown),
        costs.occupied.map_or(S::infinity(), cast::<S>),
        costs.risk_radius,
    )?;
    let script = match &file.updates {
        Some(u) => Some(mapio::load_updates(dir.join(u))?),
        None => None,
    };
    Ok(RevealScenario {
        truth,
        sensor_radius: file.sensor_radius,
        start: GridIndex::from(file.start),
        goal: GridIndex::from(file.goal),
        config,
        script,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridBounds, GridMeta};

    fn corridor_world() -> MapDocument<f64> {
        // 20x9, walls top and bottom, one interior wall with a gap
        let meta = GridMeta::new(1.0, [0.0; 3], GridMode::TwoD);
        let mut grid = VoxelGrid::new(meta).unwrap();
        for y in 0..9 {
            for x in 0..20 {
                let wall = y == 0 || y == 8;
                let s = if wall {
                    VoxelState::Occupied
                } else {
                    VoxelState::Free
                };
                grid.set_state(GridIndex::new(x, y, 0), s).unwrap();
            }
        }
        MapDocument {
            grid,
            bounds: GridBounds::new(GridIndex::new(0, 0, 0), GridIndex::new(19, 8, 0)),
            pgm: None,
        }
    }

    #[test]
    fn fully_revealed_world_never_replans() {
        let truth = corridor_world();
        let sc = RevealScenario {
            truth,
            sensor_radius: 64,
            start: GridIndex::new(1, 4, 0),
            goal: GridIndex::new(18, 4, 0),
            config: CostConfig::new(1.0, 50.0, f64::INFINITY, 0).unwrap(),
            script: None,
        };
        let tr = run(&sc).unwrap();
        assert_eq!(tr.outcome, Outcome::Reached);
        assert_eq!(tr.replans, 0);
        // with r = 0 and a straight free corridor, distance equals the
        // fully-known optimal path length
        let field = CostField::new(sc.truth.grid.clone(), sc.config);
        let res = oracle::dijkstra(&field, sc.truth.bounds, sc.start, sc.goal).unwrap();
        let oracle_len: f64 = res
            .path
            .unwrap()
            .windows(2)
            .map(|w| w[0].distance::<f64>(w[1]))
            .sum();
        assert!((tr.distance_voxels - oracle_len).abs() < 1e-9);
    }

    #[test]
    fn hidden_wall_forces_replan_without_collision() {
        let mut truth = corridor_world();
        // wall at x = 10 with a gap at the bottom row, beyond initial sensor range
        for y in 2..8 {
            truth
                .grid
                .set_state(GridIndex::new(10, y, 0), VoxelState::Occupied)
                .unwrap();
        }
        let sc = RevealScenario {
            truth,
            sensor_radius: 3,
            start: GridIndex::new(1, 6, 0),
            goal: GridIndex::new(18, 6, 0),
            config: CostConfig::new(1.0, 5.0, f64::INFINITY, 0).unwrap(),
            script: None,
        };
        let tr = run(&sc).unwrap();
        assert_eq!(tr.outcome, Outcome::Reached);
        assert!(tr.replans >= 1, "hidden wall must force a replan");
        assert_ne!(tr.outcome, Outcome::CollisionDetected);
    }

    #[test]
    fn walled_goal_ends_stuck() {
        let mut truth = corridor_world();
        let goal = GridIndex::new(18, 4, 0);
        for dy in -1..=1i32 {
            for dx in -1..=1i32 {
                if dx != 0 || dy != 0 {
                    truth
                        .grid
                        .set_state(goal.offset(dx, dy, 0), VoxelState::Occupied)
                        .unwrap();
                }
            }
        }
        let sc = RevealScenario {
            truth,
            sensor_radius: 4,
            start: GridIndex::new(1, 4, 0),
            goal,
            config: CostConfig::default(),
            script: None,
        };
        let tr = run(&sc).unwrap();
        assert_eq!(tr.outcome, Outcome::Stuck);
        assert_ne!(tr.outcome, Outcome::CollisionDetected);
    }

    #[test]
    fn goal_occupied_in_truth_ends_stuck() {
        let mut truth = corridor_world();
        let goal = GridIndex::new(18, 4, 0);
        truth.grid.set_state(goal, VoxelState::Occupied).unwrap();
        let sc = RevealScenario {
            truth,
            sensor_radius: 4,
            start: GridIndex::new(1, 4, 0),
            goal,
            config: CostConfig::default(),
            script: None,
        };
        let tr = run(&sc).unwrap();
        assert_eq!(tr.outcome, Outcome::Stuck);
        for step in &tr.steps {
            let pos = GridIndex::new(step.position[0], step.position[1], step.position[2]);
            assert_ne!(sc.truth.grid.get_state(pos), VoxelState::Occupied);
        }
    }

    #[test]
    fn reports_are_deterministic_except_timing() {
        let truth = corridor_world();
        let make = || RevealScenario {
            truth: MapDocument {
                grid: truth.grid.clone(),
                bounds: truth.bounds,
                pgm: None,
            },
            sensor_radius: 3,
            start: GridIndex::new(1, 4, 0),
            goal: GridIndex::new(18, 4, 0),
            config: CostConfig::default(),
            script: None,
        };
        let a = run(&make()).unwrap();
        let b = run(&make()).unwrap();
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.replans, b.replans);
        assert_eq!(a.distance_voxels, b.distance_voxels);
        let strip = |s: String| -> String {
            s.lines()
                .filter(|l| !l.contains("compute_time_s"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(metrics_report(&a)), strip(metrics_report(&b)));
        let report = metrics_report(&a);
        for field in [
            "outcome:",
            "distance_voxels:",
            "replans:",
            "min_clearance_voxels:",
            "compute_time_s:",
        ] {
            assert!(report.contains(field), "report missing {field}");
        }
    }

    #[test]
    fn stuck_distance_counts_steps_taken() {
        let mut truth = corridor_world();
        // wall the goal corner off entirely
        for y in 1..8 {
            truth
                .grid
                .set_state(GridIndex::new(15, y, 0), VoxelState::Occupied)
                .unwrap();
        }
        let sc = RevealScenario {
            truth,
            sensor_radius: 2,
            start: GridIndex::new(1, 4, 0),
            goal: GridIndex::new(18, 4, 0),
            config: CostConfig::new(1.0, 50.0, f64::INFINITY, 1).unwrap(),
            script: None,
        };
        let tr = run(&sc).unwrap();
        assert_eq!(tr.outcome, Outcome::Stuck);
        let steps_moved = tr
            .steps
            .windows(2)
            .filter(|w| w[0].position != w[1].position)
            .count();
        assert!(steps_moved > 0);
        assert!(tr.distance_voxels > 0.0);
    }

    #[test]
    fn lattice_ray_endpoints_and_monotonicity() {
        let a = GridIndex::new(0, 0, 0);
        let b = GridIndex::new(5, 2, 0);
        let ray = lattice_ray(a, b);
        assert_eq!(ray.first(), Some(&a));
        assert_eq!(ray.last(), Some(&b));
        assert_eq!(ray.len(), 6);
        for w in ray.windows(2) {
            assert!(w[0].chebyshev(w[1]) == 1);
        }
        assert_eq!(lattice_ray(a, a), vec![a]);
    }

    #[test]
    fn occlusion_blocks_reveal_behind_walls() {
        let meta = GridMeta::new(1.0, [0.0; 3], GridMode::TwoD);
        let mut grid = VoxelGrid::new(meta).unwrap();
        for x in 0..7 {
            grid.set_state(GridIndex::new(x, 0, 0), VoxelState::Free)
                .unwrap();
        }
        grid.set_state(GridIndex::new(3, 0, 0), VoxelState::Occupied)
            .unwrap();
        // the wall itself is visible, the voxel behind it is not
        assert!(line_of_sight(
            &grid,
            GridIndex::new(0, 0, 0),
            GridIndex::new(3, 0, 0)
        ));
        assert!(!line_of_sight(
            &grid,
            GridIndex::new(0, 0, 0),
            GridIndex::new(5, 0, 0)
        ));
    }

    #[test]
    fn scripted_updates_override_sensor() {
        let truth = corridor_world();
        let script = UpdateStream {
            events: vec![crate::mapio::UpdateEvent {
                t: 0,
                changes: truth
                    .bounds
                    .iter()
                    .map(|i| (i.x, i.y, i.z, truth.grid.get_state(i)))
                    .collect(),
                robot: None,
            }],
        };
        let sc = RevealScenario {
            truth,
            sensor_radius: 1,
            start: GridIndex::new(1, 4, 0),
            goal: GridIndex::new(18, 4, 0),
            config: CostConfig::new(1.0, 50.0, f64::INFINITY, 0).unwrap(),
            script: Some(script),
        };
        let tr = run(&sc).unwrap();
        assert_eq!(tr.outcome, Outcome::Reached);
        assert_eq!(tr.replans, 0);
    }
}
