//! Layered solution graph and minimum-cost path selection.
//!
//! The inverse-kinematics solutions at consecutive via-points form the layers
//! of a directed acyclic graph with implicit complete bipartite edges between
//! consecutive layers. Six edge-cost functions are available; the optimal
//! joint sequence is found with Dijkstra's algorithm run from every
//! first-layer node, with an exhaustive enumeration and a seeded random
//! baseline for comparison.

use crate::geometry::RobotGeometry;
use crate::kinematics::{manipulability, position_jacobian, wrap_angle, JointConfig};
use crate::trajectory::SolutionLayer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Which edge-cost function to use.
///
/// `f1` sum of joint displacements, `f2` max displacement, `f3` population
/// standard deviation of the displacements, `f4` weighted sum of the first
/// three, `f5` manipulability at the target node, `f6` weighted sum of f4
/// and f5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostKind {
    SumAbs,
    MaxAbs,
    StdDev,
    WeightedSum,
    Manipulability,
    Combined,
}

impl CostKind {
    pub const ALL: [CostKind; 6] = [
        CostKind::SumAbs,
        CostKind::MaxAbs,
        CostKind::StdDev,
        CostKind::WeightedSum,
        CostKind::Manipulability,
        CostKind::Combined,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            CostKind::SumAbs => "f1",
            CostKind::MaxAbs => "f2",
            CostKind::StdDev => "f3",
            CostKind::WeightedSum => "f4",
            CostKind::Manipulability => "f5",
            CostKind::Combined => "f6",
        }
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CostKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(CostKind::SumAbs),
            "f2" => Ok(CostKind::MaxAbs),
            "f3" => Ok(CostKind::StdDev),
            "f4" => Ok(CostKind::WeightedSum),
            "f5" => Ok(CostKind::Manipulability),
            "f6" => Ok(CostKind::Combined),
            other => Err(format!("unknown cost function `{other}`, expected f1..f6")),
        }
    }
}

/// How per-joint differences are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleDiff {
    /// Signed difference reduced to `(-pi, pi]` before taking the magnitude.
    Wrapped,
    /// Plain value difference; crossing the branch cut costs a full turn.
    Raw,
}

/// Direction of the manipulability term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F5Direction {
    /// Use the manipulability value itself as the edge cost, so the minimum
    /// total cost minimizes accumulated manipulability.
    AsPaper,
    /// Use `1 / (omega + 1e-6)`, so lower cost prefers higher manipulability.
    Negated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSpec {
    pub kind: CostKind,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub angle_diff: AngleDiff,
    pub f5_direction: F5Direction,
}

impl CostSpec {
    pub fn new(kind: CostKind) -> Self {
        CostSpec {
            kind,
            w1: 0.4,
            w2: 0.2,
            w3: 0.4,
            w4: 1.0 / (1.0 + 1e-6),
            w5: 1e-6 / (1.0 + 1e-6),
            angle_diff: AngleDiff::Wrapped,
            f5_direction: F5Direction::AsPaper,
        }
    }

    pub fn validate(&self) -> Result<(), PathError> {
        let sum123 = self.w1 + self.w2 + self.w3;
        if (sum123 - 1.0).abs() > 1e-9 || self.w1 <= 0.0 || self.w2 <= 0.0 || self.w3 <= 0.0 {
            return Err(PathError::BadWeights {
                detail: format!("w1 + w2 + w3 must be 1 with all positive, got {sum123}"),
            });
        }
        let sum45 = self.w4 + self.w5;
        if (sum45 - 1.0).abs() > 1e-9 || self.w4 <= 0.0 || self.w5 <= 0.0 {
            return Err(PathError::BadWeights {
                detail: format!("w4 + w5 must be 1 with both positive, got {sum45}"),
            });
        }
        Ok(())
    }
}

impl Default for CostSpec {
    fn default() -> Self {
        CostSpec::new(CostKind::SumAbs)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    /// A via-point had no inverse-kinematics solution, so no path can cross it.
    #[error("via-point {layer} has no inverse-kinematics solution")]
    DisconnectedLayer { layer: usize },
    #[error("graph enumeration too large: {paths} paths exceed the 10^6 guard")]
    TooLarge { paths: f64 },
    #[error("empty graph")]
    Empty,
    #[error("invalid cost weights: {detail}")]
    BadWeights { detail: String },
}

/// Layered DAG of joint configurations. Edges are implicit: every node of
/// layer `i` connects to every node of layer `i + 1`.
#[derive(Debug, Clone)]
pub struct SolutionGraph {
    layers: Vec<Vec<JointConfig>>,
}

impl SolutionGraph {
    pub fn from_layers(layers: Vec<Vec<JointConfig>>) -> Result<Self, PathError> {
        if layers.is_empty() {
            return Err(PathError::Empty);
        }
        for (layer, nodes) in layers.iter().enumerate() {
            if nodes.is_empty() {
                return Err(PathError::DisconnectedLayer { layer });
            }
        }
        Ok(SolutionGraph { layers })
    }

    pub fn layers(&self) -> &[Vec<JointConfig>] {
        &self.layers
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn edge_count(&self) -> usize {
        self.layers
            .windows(2)
            .map(|pair| pair[0].len() * pair[1].len())
            .sum()
    }

    pub fn node(&self, layer: usize, index: usize) -> &JointConfig {
        &self.layers[layer][index]
    }

    fn path_count(&self) -> f64 {
        self.layers.iter().map(|l| l.len() as f64).product()
    }
}

/// Builds the graph from trajectory layers, keeping the canonical
/// inverse-kinematics node order. Fails on the first empty layer, naming the
/// offending via-point.
pub fn build_graph(layers: &[SolutionLayer]) -> Result<SolutionGraph, PathError> {
    if layers.is_empty() {
        return Err(PathError::Empty);
    }
    for (index, layer) in layers.iter().enumerate() {
        if layer.solutions.solutions.is_empty() {
            return Err(PathError::DisconnectedLayer { layer: index });
        }
    }
    Ok(SolutionGraph {
        layers: layers
            .iter()
            .map(|layer| layer.solutions.solutions.clone())
            .collect(),
    })
}

fn joint_displacements(spec: &CostSpec, qs: &JointConfig, qt: &JointConfig) -> [f64; 6] {
    std::array::from_fn(|j| match spec.angle_diff {
        AngleDiff::Wrapped => wrap_angle(qs[j] - qt[j]).abs(),
        AngleDiff::Raw => (qs[j] - qt[j]).abs(),
    })
}

/// Cost of the edge from `qs` (layer i) to `qt` (layer i + 1). Always >= 0.
pub fn edge_cost(
    spec: &CostSpec,
    qs: &JointConfig,
    qt: &JointConfig,
    geom: &RobotGeometry,
) -> f64 {
    let d = joint_displacements(spec, qs, qt);
    let f1 = || d.iter().sum::<f64>();
    let f2 = || d.iter().fold(0.0f64, |acc, v| acc.max(*v));
    let f3 = || {
        let mean = d.iter().sum::<f64>() / 6.0;
        (d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 6.0).sqrt()
    };
    let f4 = || spec.w1 * f1() + spec.w2 * f2() + spec.w3 * f3();
    let f5 = || {
        let omega = manipulability(&position_jacobian(geom, qt));
        match spec.f5_direction {
            F5Direction::AsPaper => omega,
            F5Direction::Negated => 1.0 / (omega + 1e-6),
        }
    };
    match spec.kind {
        CostKind::SumAbs => f1(),
        CostKind::MaxAbs => f2(),
        CostKind::StdDev => f3(),
        CostKind::WeightedSum => f4(),
        CostKind::Manipulability => f5(),
        CostKind::Combined => spec.w4 * f4() + spec.w5 * f5(),
    }
}

/// A chosen node per layer with the realized edge costs.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    /// Node index per layer.
    pub node_indices: Vec<usize>,
    pub total_cost: f64,
    pub per_edge_costs: Vec<f64>,
    /// Which first-layer node the winning path starts from.
    pub start_index: usize,
}

impl PathResult {
    pub fn configs(&self, graph: &SolutionGraph) -> Vec<JointConfig> {
        self.node_indices
            .iter()
            .enumerate()
            .map(|(layer, &index)| *graph.node(layer, index))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    layer: usize,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed on cost for a min-heap; index order as a deterministic
        // secondary key.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.layer.cmp(&self.layer))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Precomputed edge costs between consecutive layers.
struct EdgeTable {
    costs: Vec<Vec<Vec<f64>>>,
}

impl EdgeTable {
    fn new(graph: &SolutionGraph, spec: &CostSpec, geom: &RobotGeometry) -> Self {
        let costs = graph
            .layers
            .windows(2)
            .map(|pair| {
                pair[0]
                    .iter()
                    .map(|qs| {
                        pair[1]
                            .iter()
                            .map(|qt| edge_cost(spec, qs, qt, geom))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        EdgeTable { costs }
    }

    fn cost(&self, layer: usize, from: usize, to: usize) -> f64 {
        self.costs[layer][from][to]
    }
}

/// Dijkstra from one fixed first-layer node; returns the cost-to-node table.
fn dijkstra_distances(graph: &SolutionGraph, edges: &EdgeTable, start: usize) -> Vec<Vec<f64>> {
    let mut dist: Vec<Vec<f64>> = graph
        .layers
        .iter()
        .map(|layer| vec![f64::INFINITY; layer.len()])
        .collect();
    let mut settled: Vec<Vec<bool>> = graph
        .layers
        .iter()
        .map(|layer| vec![false; layer.len()])
        .collect();
    let mut heap = BinaryHeap::new();
    dist[0][start] = 0.0;
    heap.push(HeapEntry { cost: 0.0, layer: 0, node: start });
    while let Some(HeapEntry { cost, layer, node }) = heap.pop() {
        if settled[layer][node] {
            continue;
        }
        settled[layer][node] = true;
        if layer + 1 == graph.layer_count() {
            continue;
        }
        for next in 0..graph.layers[layer + 1].len() {
            let candidate = cost + edges.cost(layer, node, next);
            if candidate < dist[layer + 1][next] {
                dist[layer + 1][next] = candidate;
                heap.push(HeapEntry { cost: candidate, layer: layer + 1, node: next });
            }
        }
    }
    dist
}

/// Minimum suffix cost from every node to the last layer. Used to
/// reconstruct the tie-broken optimal path after Dijkstra has established
/// the optimal cost.
fn suffix_costs(graph: &SolutionGraph, edges: &EdgeTable) -> Vec<Vec<f64>> {
    let n = graph.layer_count();
    let mut suffix: Vec<Vec<f64>> = graph
        .layers
        .iter()
        .map(|layer| vec![0.0; layer.len()])
        .collect();
    for layer in (0..n.saturating_sub(1)).rev() {
        for node in 0..graph.layers[layer].len() {
            let best = (0..graph.layers[layer + 1].len())
                .map(|next| edges.cost(layer, node, next) + suffix[layer + 1][next])
                .fold(f64::INFINITY, f64::min);
            suffix[layer][node] = best;
        }
    }
    suffix
}

fn assemble(
    graph: &SolutionGraph,
    edges: &EdgeTable,
    start: usize,
    total: f64,
    suffix: &[Vec<f64>],
) -> PathResult {
    // Forward walk picking the smallest node index that still completes an
    // optimal path: lexicographic tie-break over the node index sequence.
    let mut node_indices = vec![start];
    let mut per_edge_costs = Vec::with_capacity(graph.layer_count().saturating_sub(1));
    let mut current = start;
    for layer in 0..graph.layer_count() - 1 {
        let target = suffix[layer][current];
        let mut chosen = None;
        for next in 0..graph.layers[layer + 1].len() {
            let through = edges.cost(layer, current, next) + suffix[layer + 1][next];
            if through <= target {
                chosen = Some(next);
                break;
            }
        }
        let next = chosen.expect("suffix table admits an optimal continuation");
        per_edge_costs.push(edges.cost(layer, current, next));
        node_indices.push(next);
        current = next;
    }
    let _ = total;
    PathResult {
        total_cost: per_edge_costs.iter().sum(),
        node_indices,
        per_edge_costs,
        start_index: start,
    }
}

/// Minimum-cost path over all (start, end) pairs: Dijkstra from every
/// first-layer node, comparing the total costs of all runs. Ties go to the
/// lexicographically smallest (start index, node index sequence).
pub fn shortest_path(
    graph: &SolutionGraph,
    spec: &CostSpec,
    geom: &RobotGeometry,
) -> Result<PathResult, PathError> {
    spec.validate()?;
    let edges = EdgeTable::new(graph, spec, geom);
    let last = graph.layer_count() - 1;
    let mut best: Option<(f64, usize)> = None;
    for start in 0..graph.layers[0].len() {
        let dist = dijkstra_distances(graph, &edges, start);
        let total = dist[last].iter().copied().fold(f64::INFINITY, f64::min);
        let improves = match best {
            None => true,
            Some((cost, _)) => total < cost,
        };
        if improves {
            best = Some((total, start));
        }
    }
    let (total, start) = best.ok_or(PathError::Empty)?;
    let suffix = suffix_costs(graph, &edges);
    Ok(assemble(graph, &edges, start, total, &suffix))
}

/// Exhaustive minimum over all layer-wise choices; the independent oracle for
/// [`shortest_path`]. Guarded to 10^6 paths.
pub fn brute_force_path(
    graph: &SolutionGraph,
    spec: &CostSpec,
    geom: &RobotGeometry,
) -> Result<PathResult, PathError> {
    spec.validate()?;
    let paths = graph.path_count();
    if paths > 1e6 {
        return Err(PathError::TooLarge { paths });
    }
    let edges = EdgeTable::new(graph, spec, geom);
    let n = graph.layer_count();
    let sizes: Vec<usize> = graph.layers.iter().map(|l| l.len()).collect();
    let mut choice = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut total = 0.0;
        for layer in 0..n - 1 {
            total += edges.cost(layer, choice[layer], choice[layer + 1]);
        }
        // Strict improvement keeps the lexicographically first minimum.
        if best.as_ref().map_or(true, |(cost, _)| total < *cost) {
            best = Some((total, choice.clone()));
        }
        // Odometer increment in lexicographic order.
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < sizes[pos] {
                break;
            }
            choice[pos] = 0;
        }
        if pos == 0 && choice[0] == 0 {
            break;
        }
    }
    let (_, node_indices) = best.ok_or(PathError::Empty)?;
    let per_edge_costs: Vec<f64> = (0..n - 1)
        .map(|layer| edges.cost(layer, node_indices[layer], node_indices[layer + 1]))
        .collect();
    Ok(PathResult {
        total_cost: per_edge_costs.iter().sum(),
        start_index: node_indices[0],
        node_indices,
        per_edge_costs,
    })
}

/// Uniform independent choice per layer from a seeded generator; the same
/// seed always selects the same path.
pub fn random_path(
    graph: &SolutionGraph,
    seed: u64,
    spec: &CostSpec,
    geom: &RobotGeometry,
) -> Result<PathResult, PathError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let node_indices: Vec<usize> = graph
        .layers
        .iter()
        .map(|layer| rng.gen_range(0..layer.len()))
        .collect();
    let per_edge_costs: Vec<f64> = (0..graph.layer_count() - 1)
        .map(|layer| {
            edge_cost(
                spec,
                graph.node(layer, node_indices[layer]),
                graph.node(layer + 1, node_indices[layer + 1]),
                geom,
            )
        })
        .collect();
    Ok(PathResult {
        total_cost: per_edge_costs.iter().sum(),
        start_index: node_indices[0],
        node_indices,
        per_edge_costs,
    })
}
