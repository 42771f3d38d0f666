//! `gridplan` — plan paths, replay reveal scenarios, export cost maps, and
//! cross-check the planner against the brute-force oracle, all over plain
//! map files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridplan::grid::{GridBounds, GridIndex};
use gridplan::mapio::{self, MapDocument};
use gridplan::oracle;
use gridplan::planner::PlannerCore;
use gridplan::replay::{self, Outcome};
use gridplan::riskfield::{CostConfig, CostField};

const COST_TOLERANCE: f64 = 1e-6;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_UNREACHABLE: u8 = 2;
const EXIT_STUCK: u8 = 3;
const EXIT_MISMATCH: u8 = 4;
const EXIT_COLLISION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "gridplan",
    version,
    about = "Risk-aware incremental grid path planner",
    after_help = "Exit codes: 0 success/goal reached, 1 input error, \
                  2 unreachable, 3 replay stuck, 4 oracle mismatch, \
                  5 replay collision."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a path on a map and write it as JSON.
    Plan(PlanArgs),
    /// Replay a reveal scenario, printing the metrics report.
    Replay(ReplayArgs),
    /// Export the traversal-cost field of a map as a PGM image.
    Costmap(CostmapArgs),
    /// Plan and verify the result against the brute-force oracle.
    Check(CheckArgs),
}

#[derive(Args)]
struct MapArgs {
    /// 2D occupancy image (binary PGM), paired with --meta.
    #[arg(long, requires = "meta", conflicts_with = "map3d")]
    map: Option<PathBuf>,
    /// Metadata file for --map (resolution, origin, negate, thresholds).
    #[arg(long, requires = "map")]
    meta: Option<PathBuf>,
    /// 3D voxel map in dsp3d text format.
    #[arg(long)]
    map3d: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// Traversal cost per voxel length for free voxels [default: 1].
    #[arg(long)]
    cf: Option<f64>,
    /// Traversal cost for unknown voxels [default: 50].
    #[arg(long)]
    cu: Option<f64>,
    /// Finite traversal cost for occupied voxels [default: impassable].
    #[arg(long)]
    co: Option<f64>,
    /// Obstacle risk radius in voxels [default: 2].
    #[arg(long)]
    radius: Option<i32>,
}

impl CostArgs {
    fn build(&self) -> Result<CostConfig<f64>, String> {
        CostConfig::new(
            self.cf.unwrap_or(1.0),
            self.cu.unwrap_or(50.0),
            self.co.unwrap_or(f64::INFINITY),
            self.radius.unwrap_or(2),
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    map: MapArgs,
    #[command(flatten)]
    costs: CostArgs,
    /// Start point in world coordinates, X,Y or X,Y,Z.
    #[arg(long, value_parser = parse_point, value_name = "X,Y[,Z]")]
    start: [f64; 3],
    /// Goal point in world coordinates, X,Y or X,Y,Z.
    #[arg(long, value_parser = parse_point, value_name = "X,Y[,Z]")]
    goal: [f64; 3],
    /// Output path file (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Also export the cost field around the plan as a PGM image.
    #[arg(long)]
    costmap_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Scenario file (JSON) bundling map, sensor radius, endpoints, costs.
    #[arg(long)]
    scenario: PathBuf,
    /// Output trace file (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CostmapArgs {
    #[command(flatten)]
    map: MapArgs,
    #[command(flatten)]
    costs: CostArgs,
    /// Output image (PGM).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    map: MapArgs,
    #[command(flatten)]
    costs: CostArgs,
    /// Start point in world coordinates, X,Y or X,Y,Z.
    #[arg(long, value_parser = parse_point, value_name = "X,Y[,Z]")]
    start: [f64; 3],
    /// Goal point in world coordinates, X,Y or X,Y,Z.
    #[arg(long, value_parser = parse_point, value_name = "X,Y[,Z]")]
    goal: [f64; 3],
    /// Corrupt the planner's vertex table first (negative control).
    #[arg(long, hide = true)]
    corrupt: bool,
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 && parts.len() != 3 {
        return Err(format!("expected X,Y or X,Y,Z, found '{s}'"));
    }
    let mut p = [0.0f64; 3];
    for (i, part) in parts.iter().enumerate() {
        p[i] = part
            .parse()
            .map_err(|_| format!("invalid coordinate '{part}'"))?;
    }
    Ok(p)
}

fn load_map(args: &MapArgs) -> Result<MapDocument<f64>, String> {
    match (&args.map, &args.meta, &args.map3d) {
        (Some(img), Some(meta), None) => {
            mapio::load_grid2d::<f64>(img, meta).map_err(|e| e.to_string())
        }
        (None, None, Some(m3)) => mapio::load_grid3d::<f64>(m3).map_err(|e| e.to_string()),
        _ => Err("provide either --map with --meta, or --map3d".to_string()),
    }
}

/// Search region: the mapped area plus a one-voxel margin, so endpoints
/// adjacent to the map stay addressable.
fn planning_bounds(doc: &MapDocument<f64>) -> GridBounds {
    doc.bounds.expand_in_mode(1, doc.grid.mode())
}

fn resolve_endpoint(
    doc: &MapDocument<f64>,
    bounds: GridBounds,
    world: [f64; 3],
    what: &str,
) -> Result<GridIndex, String> {
    let idx = doc.grid.meta().world_to_index(world);
    if !bounds.contains(idx) {
        return Err(format!(
            "{what} voxel {idx} is outside the mapped area (and not adjacent to it)"
        ));
    }
    Ok(idx)
}

fn fail(msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_ERROR)
}

fn run_plan(args: &PlanArgs) -> ExitCode {
    let doc = match load_map(&args.map) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let config = match args.costs.build() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let bounds = planning_bounds(&doc);
    let start = match resolve_endpoint(&doc, bounds, args.start, "start") {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let goal = match resolve_endpoint(&doc, bounds, args.goal, "goal") {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let meta = *doc.grid.meta();
    let doc_bounds = doc.bounds;
    let field = CostField::new(doc.grid, config);
    let mut planner = match PlannerCore::new(&field, start, goal, Some(bounds)) {
        Ok(p) => p,
        Err(e) => {
            // an occupied goal (or start) means there is no path to report
            println!("unreachable: {e}");
            return ExitCode::from(EXIT_UNREACHABLE);
        }
    };
    let path = planner.compute_path(&field);
    if let Some(cm) = &args.costmap_out {
        if let Err(e) = mapio::save_costmap(&field, doc_bounds, cm) {
            return fail(e.to_string());
        }
    }
    match path {
        Some(path) => {
            if let Err(e) = mapio::save_path(&path, &meta, &args.out) {
                return fail(e.to_string());
            }
            println!(
                "path: {} voxels, total cost {:.6}, written to {}",
                path.indices.len(),
                path.total_cost,
                args.out.display()
            );
            ExitCode::from(EXIT_OK)
        }
        None => {
            println!("unreachable");
            ExitCode::from(EXIT_UNREACHABLE)
        }
    }
}

fn run_replay(args: &ReplayArgs) -> ExitCode {
    let scenario = match replay::load_scenario::<f64>(&args.scenario) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    let trace = match replay::run(&scenario) {
        Ok(t) => t,
        Err(e) => return fail(e.to_string()),
    };
    if let Err(e) = replay::save_trace(&trace, &args.out) {
        return fail(e.to_string());
    }
    print!("{}", replay::metrics_report(&trace));
    match trace.outcome {
        Outcome::Reached => ExitCode::from(EXIT_OK),
        Outcome::Stuck => ExitCode::from(EXIT_STUCK),
        Outcome::CollisionDetected => ExitCode::from(EXIT_COLLISION),
    }
}

fn run_costmap(args: &CostmapArgs) -> ExitCode {
    let doc = match load_map(&args.map) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let config = match args.costs.build() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let bounds = doc.bounds;
    let field = CostField::new(doc.grid, config);
    match mapio::save_costmap(&field, bounds, &args.out) {
        Ok(()) => {
            println!("costmap written to {}", args.out.display());
            ExitCode::from(EXIT_OK)
        }
        Err(e) => fail(e.to_string()),
    }
}

fn run_check(args: &CheckArgs) -> ExitCode {
    let doc = match load_map(&args.map) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let config = match args.costs.build() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let bounds = planning_bounds(&doc);
    let start = match resolve_endpoint(&doc, bounds, args.start, "start") {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let goal = match resolve_endpoint(&doc, bounds, args.goal, "goal") {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let field = CostField::new(doc.grid, config);

    let planner_cost: Option<f64> = match PlannerCore::new(&field, start, goal, Some(bounds)) {
        Ok(mut planner) => {
            planner.compute_path(&field);
            if args.corrupt {
                planner.debug_perturb_g(start, 1.0);
            }
            let g = planner.cost_to_goal(start);
            g.is_finite().then_some(g)
        }
        Err(_) => None,
    };
    let oracle_cost = match oracle::dijkstra(&field, bounds, start, goal) {
        Ok(res) => res.cost,
        Err(e) => return fail(e.to_string()),
    };

    let fmt = |c: Option<f64>| match c {
        Some(v) => format!("{v:.9}"),
        None => "unreachable".to_string(),
    };
    println!("planner: {}", fmt(planner_cost));
    println!("oracle:  {}", fmt(oracle_cost));
    let agree = match (planner_cost, oracle_cost) {
        (Some(a), Some(b)) => (a - b).abs() <= COST_TOLERANCE,
        (None, None) => true,
        _ => false,
    };
    if agree {
        println!("agreement within {COST_TOLERANCE:e}");
        ExitCode::from(EXIT_OK)
    } else {
        println!("MISMATCH");
        ExitCode::from(EXIT_MISMATCH)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Plan(args) => run_plan(args),
        Command::Replay(args) => run_replay(args),
        Command::Costmap(args) => run_costmap(args),
        Command::Check(args) => run_check(args),
    }
}
