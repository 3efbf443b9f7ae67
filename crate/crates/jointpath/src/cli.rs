//! End-to-end pipeline driver: scenario + geometry in, reproducible CSV/JSON
//! artifacts out.
//!
//! For fixed inputs every emitted CSV/JSON file is byte-identical across
//! runs. Wall-clock timings are machine-dependent and therefore quarantined
//! in their own `timings.json`, which is excluded from that guarantee.

use crate::geometry::RobotGeometry;
use crate::pathopt::{
    build_graph, random_path, shortest_path, AngleDiff, CostKind, CostSpec, F5Direction,
    PathError, PathResult, SolutionGraph,
};
use crate::trajectory::{bundled, plan_trajectory, MotionProfile, Scenario, SolutionLayer};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

/// Default subdivision count for bundled scenarios when no override is given.
pub const DEFAULT_T_STEPS: u32 = 25;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad inputs: missing files, parse failures, invalid overrides. Exit code 1.
    #[error("{0}")]
    Input(String),
    /// A via-point has no IK solution, so no path exists. Exit code 2.
    #[error(
        "via-point {layer} (segment {segment}, step {step}) at ({x:.3}, {y:.3}, {z:.3}) has no \
         inverse-kinematics solution"
    )]
    Disconnected {
        layer: usize,
        segment: usize,
        step: u32,
        x: f64,
        y: f64,
        z: f64,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Disconnected { .. } => 2,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Bundled scenario name (`test1`..`test7`) or a path to a scenario file.
    pub scenario: String,
    /// Geometry file; bundled myCobot-280 when absent.
    pub geometry: Option<PathBuf>,
    pub costs: Vec<CostKind>,
    pub profile: Option<MotionProfile>,
    pub t_steps: Option<u32>,
    /// Overrides `(w1, w2, w3)` and optionally `(w4, w5)`.
    pub weights: Option<Vec<f64>>,
    pub angle_diff: AngleDiff,
    pub f5_direction: F5Direction,
    pub random_seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: "test1".to_string(),
            geometry: None,
            costs: vec![CostKind::SumAbs],
            profile: None,
            t_steps: None,
            weights: None,
            angle_diff: AngleDiff::Wrapped,
            f5_direction: F5Direction::AsPaper,
            random_seeds: Vec::new(),
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CostSummary {
    pub total_cost: f64,
    pub start_index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub profile: String,
    pub t_steps: u32,
    pub segment_count: usize,
    pub layer_count: usize,
    pub per_layer_solution_counts: Vec<usize>,
    pub total_solutions: usize,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_empty_layer: Option<usize>,
    pub costs: BTreeMap<String, CostSummary>,
    pub random_baselines: BTreeMap<u64, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub machine_dependent: bool,
    pub ik_seconds: f64,
    pub dijkstra_seconds: BTreeMap<String, f64>,
}

/// 12 significant digits, fixed exponent form; stable across runs.
fn fmt_g12(v: f64) -> String {
    format!("{v:.11e}")
}

fn resolve_spec(config: &RunConfig, kind: CostKind) -> Result<CostSpec, CliError> {
    let mut spec = CostSpec::new(kind);
    spec.angle_diff = config.angle_diff;
    spec.f5_direction = config.f5_direction;
    if let Some(w) = &config.weights {
        match w.len() {
            3 => {
                spec.w1 = w[0];
                spec.w2 = w[1];
                spec.w3 = w[2];
            }
            5 => {
                spec.w1 = w[0];
                spec.w2 = w[1];
                spec.w3 = w[2];
                spec.w4 = w[3];
                spec.w5 = w[4];
            }
            n => {
                return Err(CliError::Input(format!(
                    "--weights takes 3 or 5 comma-separated values, got {n}"
                )))
            }
        }
    }
    spec.validate().map_err(input_err)?;
    Ok(spec)
}

fn load_scenario(config: &RunConfig) -> Result<Scenario, CliError> {
    let t_steps = config.t_steps.unwrap_or(DEFAULT_T_STEPS);
    let profile = config.profile.unwrap_or(MotionProfile::Uniform);
    if let Some(scenario) = bundled::by_name(&config.scenario, t_steps, profile) {
        // Bundled defaults are constructed directly with the requested
        // subdivision and profile.
        scenario.validate().map_err(input_err)?;
        return Ok(scenario);
    }
    let mut scenario = Scenario::load(&config.scenario).map_err(input_err)?;
    if let Some(t) = config.t_steps {
        scenario.t_steps = t;
    }
    if let Some(p) = config.profile {
        scenario.profile = p;
    }
    scenario.validate().map_err(input_err)?;
    Ok(scenario)
}

fn write_via_points(path: &Path, layers: &[SolutionLayer]) -> Result<(), CliError> {
    let mut text = String::from("segment,t,s,x,y,z\n");
    for layer in layers {
        let v = &layer.via;
        writeln!(
            text,
            "{},{},{},{},{},{}",
            v.segment,
            v.step,
            fmt_g12(v.s),
            fmt_g12(v.position.x),
            fmt_g12(v.position.y),
            fmt_g12(v.position.z)
        )
        .expect("write to string");
    }
    fs::write(path, text).map_err(input_err)
}

#[derive(Serialize)]
struct LayerRecord {
    segment: usize,
    t: u32,
    s: f64,
    position: [f64; 3],
    solutions: Vec<[f64; 6]>,
}

fn write_solutions(path: &Path, layers: &[SolutionLayer]) -> Result<(), CliError> {
    let records: Vec<LayerRecord> = layers
        .iter()
        .map(|layer| LayerRecord {
            segment: layer.via.segment,
            t: layer.via.step,
            s: layer.via.s,
            position: [layer.via.position.x, layer.via.position.y, layer.via.position.z],
            solutions: layer
                .solutions
                .solutions
                .iter()
                .map(|q| q.angles())
                .collect(),
        })
        .collect();
    let text = serde_json::to_string_pretty(&records).expect("layers serialize");
    fs::write(path, text + "\n").map_err(input_err)
}

fn write_path_csv(path: &Path, graph: &SolutionGraph, result: &PathResult) -> Result<(), CliError> {
    let mut text = String::from(
        "layer,theta1,theta2,theta3,theta4,theta5,theta6,edge_cost\n",
    );
    for (layer, &node) in result.node_indices.iter().enumerate() {
        let q = graph.node(layer, node).angles();
        let cost = if layer == 0 { 0.0 } else { result.per_edge_costs[layer - 1] };
        writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            layer,
            fmt_g12(q[0]),
            fmt_g12(q[1]),
            fmt_g12(q[2]),
            fmt_g12(q[3]),
            fmt_g12(q[4]),
            fmt_g12(q[5]),
            fmt_g12(cost)
        )
        .expect("write to string");
    }
    fs::write(path, text).map_err(input_err)
}

/// Samples of the analytic feasible-region boundary for a vertical hand
/// axis: the cylinder `x^2 + y^2 = d4^2`, for external plotting.
fn write_region_boundary(path: &Path, geom: &RobotGeometry) -> Result<(), CliError> {
    let mut text = String::from("angle_rad,x,y\n");
    let d4 = geom.links.d4;
    for i in 0..360 {
        let angle = i as f64 * std::f64::consts::PI / 180.0;
        writeln!(
            text,
            "{},{},{}",
            fmt_g12(angle),
            fmt_g12(d4 * angle.cos()),
            fmt_g12(d4 * angle.sin())
        )
        .expect("write to string");
    }
    fs::write(path, text).map_err(input_err)
}

/// Runs the full pipeline and writes the artifact files into
/// `config.out_dir`.
///
/// Emits `via_points.csv`, `solutions.json`, `region.csv` and `summary.json`
/// always; `path_<cost>.csv` per requested cost and `random_path_<seed>.csv`
/// per seed when the trajectory is feasible; `timings.json` with the
/// machine-dependent wall-clock numbers.
pub fn run_scenario(config: &RunConfig) -> Result<RunSummary, CliError> {
    let geom = match &config.geometry {
        Some(path) => RobotGeometry::load(path).map_err(input_err)?,
        None => RobotGeometry::mycobot280(),
    };
    let scenario = load_scenario(config)?;
    if config.costs.is_empty() {
        return Err(CliError::Input("at least one cost function is required".into()));
    }

    fs::create_dir_all(&config.out_dir).map_err(input_err)?;

    let ik_started = Instant::now();
    let layers = plan_trajectory(&scenario, &geom).map_err(input_err)?;
    let ik_seconds = ik_started.elapsed().as_secs_f64();

    write_via_points(&config.out_dir.join("via_points.csv"), &layers)?;
    write_solutions(&config.out_dir.join("solutions.json"), &layers)?;
    write_region_boundary(&config.out_dir.join("region.csv"), &geom)?;

    let per_layer_solution_counts: Vec<usize> =
        layers.iter().map(|l| l.solutions.solutions.len()).collect();
    let total_solutions: usize = per_layer_solution_counts.iter().sum();
    let first_empty_layer = per_layer_solution_counts.iter().position(|&c| c == 0);

    let mut summary = RunSummary {
        scenario: scenario.name.clone(),
        profile: match scenario.profile {
            MotionProfile::Uniform => "uniform".to_string(),
            MotionProfile::Quintic => "quintic".to_string(),
        },
        t_steps: scenario.t_steps,
        segment_count: scenario.waypoints.len() - 1,
        layer_count: layers.len(),
        per_layer_solution_counts,
        total_solutions,
        feasible: first_empty_layer.is_none(),
        first_empty_layer,
        costs: BTreeMap::new(),
        random_baselines: BTreeMap::new(),
    };
    let mut timings = Timings {
        machine_dependent: true,
        ik_seconds,
        dijkstra_seconds: BTreeMap::new(),
    };

    let graph = match build_graph(&layers) {
        Ok(graph) => graph,
        Err(PathError::DisconnectedLayer { layer }) => {
            // Keep the partial artifacts on disk so the infeasible via-point
            // can be inspected, then report it through the exit code.
            write_summary(&config.out_dir, &summary)?;
            write_timings(&config.out_dir, &timings)?;
            let via = &layers[layer].via;
            return Err(CliError::Disconnected {
                layer,
                segment: via.segment,
                step: via.step,
                x: via.position.x,
                y: via.position.y,
                z: via.position.z,
            });
        }
        Err(other) => return Err(input_err(other)),
    };

    for &kind in &config.costs {
        let spec = resolve_spec(config, kind)?;
        let started = Instant::now();
        let result = shortest_path(&graph, &spec, &geom).map_err(input_err)?;
        timings
            .dijkstra_seconds
            .insert(kind.id().to_string(), started.elapsed().as_secs_f64());
        write_path_csv(
            &config.out_dir.join(format!("path_{}.csv", kind.id())),
            &graph,
            &result,
        )?;
        summary.costs.insert(
            kind.id().to_string(),
            CostSummary { total_cost: result.total_cost, start_index: result.start_index },
        );
    }

    for &seed in &config.random_seeds {
        let first_spec = resolve_spec(config, config.costs[0])?;
        let picked = random_path(&graph, seed, &first_spec, &geom).map_err(input_err)?;
        write_path_csv(
            &config.out_dir.join(format!("random_path_{seed}.csv")),
            &graph,
            &picked,
        )?;
        let mut totals = BTreeMap::new();
        for &kind in &config.costs {
            let spec = resolve_spec(config, kind)?;
            let total: f64 = (0..graph.layer_count() - 1)
                .map(|layer| {
                    crate::pathopt::edge_cost(
                        &spec,
                        graph.node(layer, picked.node_indices[layer]),
                        graph.node(layer + 1, picked.node_indices[layer + 1]),
                        &geom,
                    )
                })
                .sum();
            totals.insert(kind.id().to_string(), total);
        }
        summary.random_baselines.insert(seed, totals);
    }

    write_summary(&config.out_dir, &summary)?;
    write_timings(&config.out_dir, &timings)?;
    Ok(summary)
}

fn write_summary(out_dir: &Path, summary: &RunSummary) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    fs::write(out_dir.join("summary.json"), text + "\n").map_err(input_err)
}

fn write_timings(out_dir: &Path, timings: &Timings) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(timings).expect("timings serialize");
    fs::write(out_dir.join("timings.json"), text + "\n").map_err(input_err)
}

/// Recomputes a path total from its CSV text; used to check that summary
/// numbers are derivable from the other emitted files.
pub fn recompute_total_from_csv(text: &str) -> f64 {
    text.lines()
        .skip(1)
        .map(|line| {
            line.rsplit(',')
                .next()
                .expect("edge cost column")
                .parse::<f64>()
                .expect("parseable cost")
        })
        .sum()
}
