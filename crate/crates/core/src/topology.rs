//! Network geometry: node placement, radio reachability, and the
//! neighbor table each node would build from beacon exchange.
//!
//! A [`NetworkLayout`] is a set of nodes with roles and positions inside a
//! square field. Two nodes are neighbors iff their Euclidean distance is
//! within `radio_range`; the resulting [`NeighborTable`] is symmetric and
//! carries each row's own battery voltage in the energy column, mirroring
//! the table format a coordinator would collect.
//!
//! [`fit_layout`] goes the other way: given a list of pairwise distance
//! constraints (for example a published neighbor table whose coordinates
//! were never released) it reconstructs a concrete placement by multi-start
//! stress minimization, with node 1 pinned at the requested anchor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfmt;

/// 1-based node identifier. Node 1 is the coordinator in every bundled
/// network.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for NodeId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(NodeId)
    }
}

impl From<u32> for NodeId {
    fn from(raw: u32) -> Self {
        NodeId(raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Mains-powered network head; originates traffic, never relays for
    /// other pairs and never runs out of energy.
    Coordinator,
    /// Battery-powered relay. Only routers may appear as intermediate hops.
    Router,
    /// Battery-powered leaf. End devices send and receive but never
    /// forward, so they can terminate a route without extending one.
    EndDevice,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub role: Role,
    #[serde(flatten)]
    pub position: Position,
}

/// Default field side in meters.
pub const DEFAULT_AREA_SIDE: f64 = 600.0;
/// Default radio range in meters. Chosen so every distance listed in the
/// bundled neighbor tables (max 180.2776 m) is a link and the next-closest
/// non-listed pair (187.08 m in the corner network) is not.
pub const DEFAULT_RADIO_RANGE: f64 = 185.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub area_side: f64,
    pub radio_range: f64,
    pub nodes: Vec<Node>,
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("layout has no nodes")]
    Empty,
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("node ids must be >= 1, found {0}")]
    ZeroNodeId(NodeId),
    #[error("layout must contain exactly one coordinator, found {0}")]
    CoordinatorCount(usize),
    #[error("node {id} at ({x}, {y}) lies outside the {area_side} m square", x = .position.x, y = .position.y)]
    OutOfArea {
        id: NodeId,
        position: Position,
        area_side: f64,
    },
    #[error("radio range must be positive, got {0}")]
    BadRadioRange(f64),
    #[error("area side must be positive, got {0}")]
    BadAreaSide(f64),
    #[error("no battery voltage supplied for node {0}")]
    MissingVoltage(NodeId),
    #[error("failed to read layout: {0}")]
    Io(#[from] io::Error),
    #[error("failed to parse layout: {0}")]
    Parse(#[from] serde_json::Error),
}

impl NetworkLayout {
    pub fn new(area_side: f64, radio_range: f64, mut nodes: Vec<Node>) -> Result<Self, LayoutError> {
        nodes.sort_by_key(|n| n.id);
        let layout = NetworkLayout {
            area_side,
            radio_range,
            nodes,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Check the structural invariants: positive field and range, unique
    /// 1-based ids, exactly one coordinator, every node inside the field.
    pub fn validate(&self) -> Result<(), LayoutError> {
        if self.nodes.is_empty() {
            return Err(LayoutError::Empty);
        }
        if !(self.area_side > 0.0) {
            return Err(LayoutError::BadAreaSide(self.area_side));
        }
        if !(self.radio_range > 0.0) {
            return Err(LayoutError::BadRadioRange(self.radio_range));
        }
        let mut seen = BTreeSet::new();
        let mut coordinators = 0usize;
        for node in &self.nodes {
            if node.id.0 == 0 {
                return Err(LayoutError::ZeroNodeId(node.id));
            }
            if !seen.insert(node.id) {
                return Err(LayoutError::DuplicateNode(node.id));
            }
            if node.role == Role::Coordinator {
                coordinators += 1;
            }
            let p = node.position;
            let inside = (0.0..=self.area_side).contains(&p.x) && (0.0..=self.area_side).contains(&p.y);
            if !inside {
                return Err(LayoutError::OutOfArea {
                    id: node.id,
                    position: p,
                    area_side: self.area_side,
                });
            }
        }
        if coordinators != 1 {
            return Err(LayoutError::CoordinatorCount(coordinators));
        }
        Ok(())
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn position_of(&self, id: NodeId) -> Option<Position> {
        self.node(id).map(|n| n.position)
    }

    pub fn role_of(&self, id: NodeId) -> Option<Role> {
        self.node(id).map(|n| n.role)
    }

    pub fn coordinator(&self) -> NodeId {
        self.nodes
            .iter()
            .find(|n| n.role == Role::Coordinator)
            .map(|n| n.id)
            .expect("validated layout has a coordinator")
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    /// Distance between two nodes that are known to exist in the layout.
    pub fn node_distance(&self, a: NodeId, b: NodeId) -> Option<f64> {
        Some(distance(self.position_of(a)?, self.position_of(b)?))
    }

    /// Ids within radio range of `id`, ascending, excluding `id` itself.
    pub fn neighbors_of(&self, id: NodeId) -> Vec<NodeId> {
        let Some(p) = self.position_of(id) else {
            return Vec::new();
        };
        self.nodes
            .iter()
            .filter(|n| n.id != id && distance(p, n.position) <= self.radio_range)
            .map(|n| n.id)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LayoutError> {
        let layout: NetworkLayout = serde_json::from_str(text)?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn load(path: &Path) -> Result<Self, LayoutError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), LayoutError> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

// ===== neighbor table =====

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborRow {
    pub node: NodeId,
    pub neighbor: NodeId,
    /// Link length in meters.
    pub distance: f64,
    /// Battery voltage of `node` (not of the neighbor) at snapshot time.
    pub energy: f64,
}

/// Symmetric, irreflexive table of all in-range pairs, sorted by
/// `(node, neighbor)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NeighborTable {
    pub rows: Vec<NeighborRow>,
}

impl NeighborTable {
    pub fn neighbors_of(&self, id: NodeId) -> Vec<NodeId> {
        self.rows
            .iter()
            .filter(|r| r.node == id)
            .map(|r| r.neighbor)
            .collect()
    }

    pub fn row(&self, node: NodeId, neighbor: NodeId) -> Option<&NeighborRow> {
        self.rows
            .iter()
            .find(|r| r.node == node && r.neighbor == neighbor)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// CSV export: `node,neighbor,distance_m,energy_v`, one row per
    /// directed pair, distances and voltages at four decimals.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "node,neighbor,distance_m,energy_v")?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                row.node,
                row.neighbor,
                numfmt::meters(row.distance),
                numfmt::volts(row.energy)
            )?;
        }
        Ok(())
    }
}

/// Build the neighbor table of `layout` with the energy column filled from
/// `voltages` (volts per node; the coordinator's mains feed is reported as
/// its nominal voltage by the caller).
pub fn build_neighbor_table(
    layout: &NetworkLayout,
    voltages: &BTreeMap<NodeId, f64>,
) -> Result<NeighborTable, LayoutError> {
    layout.validate()?;
    let mut rows = Vec::new();
    for node in &layout.nodes {
        let energy = *voltages
            .get(&node.id)
            .ok_or(LayoutError::MissingVoltage(node.id))?;
        for other in &layout.nodes {
            if other.id == node.id {
                continue;
            }
            let d = distance(node.position, other.position);
            if d <= layout.radio_range {
                rows.push(NeighborRow {
                    node: node.id,
                    neighbor: other.id,
                    distance: d,
                    energy,
                });
            }
        }
    }
    rows.sort_by_key(|r| (r.node, r.neighbor));
    Ok(NeighborTable { rows })
}

/// Convenience: every node reported at the same fresh voltage.
pub fn uniform_voltages(layout: &NetworkLayout, volts: f64) -> BTreeMap<NodeId, f64> {
    layout.node_ids().map(|id| (id, volts)).collect()
}

// ===== random layouts (property-test helper) =====

/// Deterministic uniform-random layout for property tests: node 1 is the
/// coordinator, the next `router_count` ids are routers, the rest end
/// devices. Positions are i.i.d. uniform in the field, so connectivity is
/// not guaranteed — callers that need a route must be prepared for none.
pub fn random_layout(
    seed: u64,
    node_count: u32,
    router_count: u32,
    area_side: f64,
    radio_range: f64,
) -> NetworkLayout {
    assert!(node_count >= 1, "need at least the coordinator");
    assert!(router_count < node_count, "routers must leave room for node 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (1..=node_count)
        .map(|id| {
            let role = if id == 1 {
                Role::Coordinator
            } else if id <= 1 + router_count {
                Role::Router
            } else {
                Role::EndDevice
            };
            Node {
                id: NodeId(id),
                role,
                position: Position {
                    x: rng.gen_range(0.0..=area_side),
                    y: rng.gen_range(0.0..=area_side),
                },
            }
        })
        .collect();
    NetworkLayout {
        area_side,
        radio_range,
        nodes,
    }
}

// ===== layout fitting =====

/// One pairwise distance requirement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceConstraint {
    pub a: NodeId,
    pub b: NodeId,
    pub distance: f64,
}

impl DistanceConstraint {
    pub fn new(a: u32, b: u32, distance: f64) -> Self {
        DistanceConstraint {
            a: NodeId(a),
            b: NodeId(b),
            distance,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub area_side: f64,
    pub radio_range: f64,
    /// Node 1 is pinned here; center and corner studies use `(300, 300)`
    /// and `(0, 600)` respectively.
    pub anchor: Position,
    pub seed: u64,
    /// Independent random restarts before giving up.
    pub starts: usize,
    /// Stress-majorization iterations per start.
    pub max_iterations: usize,
    /// Acceptance bound on the worst absolute distance residual, meters.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            area_side: DEFAULT_AREA_SIDE,
            radio_range: DEFAULT_RADIO_RANGE,
            anchor: Position::new(300.0, 300.0),
            seed: 42,
            starts: 64,
            max_iterations: 4000,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("constraint list is empty")]
    NoConstraints,
    #[error("constraint distances must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error(
        "no feasible layout found within tolerance {tolerance} m (best residual {best_residual:.6} m after {starts} starts)"
    )]
    NoFeasibleLayout {
        tolerance: f64,
        best_residual: f64,
        starts: usize,
    },
}

/// Reconstruct node positions from pairwise distance constraints.
///
/// Runs stress majorization (SMACOF with unit weights on the constrained
/// pairs) from `starts` random initializations, keeping node 1 pinned at
/// the anchor. A converged embedding is accepted if every constraint is
/// met within `tolerance` and every node can be brought inside the field
/// by some rotation/reflection about the anchor — distances are invariant
/// under those, so the solver is free to exploit them.
///
/// Roles follow the study convention: node 1 coordinator, ids 2–7 routers,
/// higher ids end devices.
pub fn fit_layout(
    constraints: &[DistanceConstraint],
    options: &FitOptions,
) -> Result<NetworkLayout, FitError> {
    if constraints.is_empty() {
        return Err(FitError::NoConstraints);
    }
    if let Some(c) = constraints.iter().find(|c| !(c.distance >= 0.0)) {
        return Err(FitError::NegativeDistance(c.distance));
    }

    // Dense-index the participating nodes; the anchor node is always
    // present even when no constraint names it.
    let mut ids: BTreeSet<NodeId> = constraints
        .iter()
        .flat_map(|c| [c.a, c.b])
        .collect();
    ids.insert(NodeId(1));
    let ids: Vec<NodeId> = ids.into_iter().collect();
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let anchor_idx = index[&NodeId(1)];

    // Adjacency of constraints per dense index.
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ids.len()];
    for c in constraints {
        let (ia, ib) = (index[&c.a], index[&c.b]);
        if ia == ib {
            continue;
        }
        adjacency[ia].push((ib, c.distance));
        adjacency[ib].push((ia, c.distance));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best_residual = f64::INFINITY;

    for _ in 0..options.starts.max(1) {
        let mut points: Vec<Position> = (0..ids.len())
            .map(|i| {
                if i == anchor_idx {
                    options.anchor
                } else {
                    Position {
                        x: rng.gen_range(0.0..=options.area_side),
                        y: rng.gen_range(0.0..=options.area_side),
                    }
                }
            })
            .collect();

        for _ in 0..options.max_iterations {
            let step = smacof_sweep(&mut points, &adjacency, anchor_idx, &mut rng);
            if step < options.tolerance * 1e-3 {
                break;
            }
        }

        let residual = worst_residual(&points, &adjacency);
        best_residual = best_residual.min(residual);
        if residual > options.tolerance {
            continue;
        }
        if let Some(fitted) = orient_into_area(&points, anchor_idx, options.area_side) {
            let nodes = ids
                .iter()
                .zip(&fitted)
                .map(|(&id, &position)| Node {
                    id,
                    role: role_by_convention(id),
                    position,
                })
                .collect();
            return Ok(NetworkLayout {
                area_side: options.area_side,
                radio_range: options.radio_range,
                nodes,
            });
        }
    }

    Err(FitError::NoFeasibleLayout {
        tolerance: options.tolerance,
        best_residual,
        starts: options.starts,
    })
}

fn role_by_convention(id: NodeId) -> Role {
    match id.0 {
        1 => Role::Coordinator,
        2..=7 => Role::Router,
        _ => Role::EndDevice,
    }
}

/// One Guttman-transform sweep; returns the largest point movement so the
/// caller can detect a stall.
fn smacof_sweep(
    points: &mut [Position],
    adjacency: &[Vec<(usize, f64)>],
    anchor_idx: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut max_move = 0.0f64;
    for i in 0..points.len() {
        if i == anchor_idx || adjacency[i].is_empty() {
            continue;
        }
        let (mut sx, mut sy) = (0.0, 0.0);
        for &(j, target) in &adjacency[i] {
            let p = points[i];
            let q = points[j];
            let mut dx = p.x - q.x;
            let mut dy = p.y - q.y;
            let mut len = dx.hypot(dy);
            if len < 1e-9 {
                // Coincident points have no direction; pick one at random
                // so the pair can separate.
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                dx = angle.cos();
                dy = angle.sin();
                len = 1.0;
            }
            sx += q.x + target * dx / len;
            sy += q.y + target * dy / len;
        }
        let n = adjacency[i].len() as f64;
        let next = Position::new(sx / n, sy / n);
        max_move = max_move.max(distance(points[i], next));
        points[i] = next;
    }
    max_move
}

fn worst_residual(points: &[Position], adjacency: &[Vec<(usize, f64)>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, edges) in adjacency.iter().enumerate() {
        for &(j, target) in edges {
            if j < i {
                continue;
            }
            worst = worst.max((distance(points[i], points[j]) - target).abs());
        }
    }
    worst
}

/// Try rotations (and their mirror images) about the anchor until every
/// point lands inside `[0, area]²`. Returns the transformed points, or
/// `None` if no sampled orientation fits.
fn orient_into_area(points: &[Position], anchor_idx: usize, area_side: f64) -> Option<Vec<Position>> {
    let anchor = points[anchor_idx];
    let steps = 144;
    for mirror in [false, true] {
        for k in 0..steps {
            let theta = k as f64 / steps as f64 * std::f64::consts::TAU;
            let (sin, cos) = theta.sin_cos();
            let transformed: Vec<Position> = points
                .iter()
                .map(|p| {
                    let dx = p.x - anchor.x;
                    let dy = if mirror { -(p.y - anchor.y) } else { p.y - anchor.y };
                    Position {
                        x: anchor.x + dx * cos - dy * sin,
                        y: anchor.y + dx * sin + dy * cos,
                    }
                })
                .collect();
            let inside = transformed
                .iter()
                .all(|p| (0.0..=area_side).contains(&p.x) && (0.0..=area_side).contains(&p.y));
            if inside {
                return Some(transformed);
            }
        }
    }
    None
}
