//! Route discovery and selection: an AODV-style request flood reduced to
//! its distance-accumulating core, plus exhaustive k-shortest-route
//! enumeration used as the engine's source of truth.
//!
//! Only routers relay. End devices answer a request addressed to them and
//! drop everything else; the coordinator originates but never forwards.
//! There are no sequence numbers, HELLO beacons, or error messages — link
//! quality is static geometry, so a request id per discovery plus
//! duplicate suppression is all the protocol state needed.
//!
//! Discovery cost ranking is total path length in meters (not hop count):
//! ties break toward the lexicographically smaller node sequence, which
//! keeps every result deterministic.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{is_depleted, Battery};
use crate::numfmt;
use crate::topology::{NetworkLayout, NodeId, Role};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    /// Node sequence from source to destination, inclusive.
    pub path: Vec<NodeId>,
    /// Sum of link lengths in meters.
    pub total_distance: f64,
}

impl Route {
    pub fn new(path: Vec<NodeId>, total_distance: f64) -> Self {
        Route {
            path,
            total_distance,
        }
    }

    /// Number of links (`path` length minus one).
    pub fn hop_count(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn source(&self) -> NodeId {
        *self.path.first().expect("route has a source")
    }

    pub fn destination(&self) -> NodeId {
        *self.path.last().expect("route has a destination")
    }

    /// Hops between the endpoints.
    pub fn intermediates(&self) -> &[NodeId] {
        if self.path.len() <= 2 {
            &[]
        } else {
            &self.path[1..self.path.len() - 1]
        }
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.path.contains(&id)
    }

    /// `1-2-8` notation used in exports and summaries.
    pub fn dashed(&self) -> String {
        self.path
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Check the route against a layout: at least one link, no repeated
    /// node, every link within radio range, every intermediate a router.
    pub fn validate(&self, layout: &NetworkLayout) -> Result<(), RouteError> {
        if self.path.len() < 2 {
            return Err(RouteError::TooShort);
        }
        let mut seen = BTreeSet::new();
        for id in &self.path {
            if !seen.insert(*id) {
                return Err(RouteError::Loop(*id));
            }
        }
        for pair in self.path.windows(2) {
            let d = layout
                .node_distance(pair[0], pair[1])
                .ok_or(RouteError::UnknownNode(pair[1]))?;
            if d > layout.radio_range {
                return Err(RouteError::LinkOutOfRange {
                    a: pair[0],
                    b: pair[1],
                    distance: d,
                });
            }
        }
        for &id in self.intermediates() {
            if layout.role_of(id) != Some(Role::Router) {
                return Err(RouteError::NonRouterIntermediate(id));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RouteError {
    #[error("route needs at least two nodes")]
    TooShort,
    #[error("route visits node {0} twice")]
    Loop(NodeId),
    #[error("route references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("link {a}-{b} is {distance:.4} m, beyond radio range")]
    LinkOutOfRange { a: NodeId, b: NodeId, distance: f64 },
    #[error("intermediate node {0} is not a router")]
    NonRouterIntermediate(NodeId),
}

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("no admissible route from {src} to {dst}")]
    NoRoute { src: NodeId, dst: NodeId },
    #[error("every candidate route from {src} to {dst} contains a depleted node")]
    AllRoutesDepleted { src: NodeId, dst: NodeId },
}

/// Ranked discovery result for one origin/destination pair, with the
/// currently active candidate. Re-sorted only by running discovery again.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    pub origin: NodeId,
    pub destination: NodeId,
    pub candidates: Vec<Route>,
    pub active_index: usize,
}

impl RoutingTable {
    pub fn new(origin: NodeId, destination: NodeId, candidates: Vec<Route>) -> Self {
        assert!(!candidates.is_empty(), "routing table needs a candidate");
        RoutingTable {
            origin,
            destination,
            candidates,
            active_index: 0,
        }
    }

    pub fn active_route(&self) -> &Route {
        &self.candidates[self.active_index]
    }
}

fn path_key(route: &Route) -> (f64, &[NodeId]) {
    (route.total_distance, &route.path)
}

fn compare_routes(a: &Route, b: &Route) -> std::cmp::Ordering {
    let (da, pa) = path_key(a);
    let (db, pb) = path_key(b);
    da.partial_cmp(&db)
        .expect("route distances are finite")
        .then_with(|| pa.cmp(pb))
}

/// Adjacency restricted to in-range pairs, neighbors ascending.
fn adjacency(layout: &NetworkLayout) -> BTreeMap<NodeId, Vec<(NodeId, f64)>> {
    let mut adj: BTreeMap<NodeId, Vec<(NodeId, f64)>> = BTreeMap::new();
    for a in &layout.nodes {
        let entry = adj.entry(a.id).or_default();
        for b in &layout.nodes {
            if a.id == b.id {
                continue;
            }
            let d = crate::topology::distance(a.position, b.position);
            if d <= layout.radio_range {
                entry.push((b.id, d));
            }
        }
    }
    adj
}

/// Find the `k` shortest loop-free routes from `src` to `dst` whose
/// intermediates are all routers. Exhaustive depth-first enumeration with
/// a cost bound: once `k` candidates are known, partial paths already
/// longer than the current k-th best cannot improve the result and are cut.
///
/// Nodes listed in `barred` are excluded from the intermediate positions
/// (they may still be an endpoint); pass an empty set for plain discovery.
pub fn discover_routes_avoiding(
    layout: &NetworkLayout,
    src: NodeId,
    dst: NodeId,
    k: usize,
    barred: &BTreeSet<NodeId>,
) -> Result<Vec<Route>, RoutingError> {
    assert!(k >= 1, "requested zero routes");
    let no_route = RoutingError::NoRoute { src, dst };
    if src == dst || layout.node(src).is_none() || layout.node(dst).is_none() {
        return Err(no_route);
    }
    let adj = adjacency(layout);

    struct Search<'a> {
        adj: &'a BTreeMap<NodeId, Vec<(NodeId, f64)>>,
        layout: &'a NetworkLayout,
        barred: &'a BTreeSet<NodeId>,
        dst: NodeId,
        k: usize,
        path: Vec<NodeId>,
        on_path: BTreeSet<NodeId>,
        found: Vec<Route>,
    }

    impl Search<'_> {
        /// Distance bound once k candidates exist; partial paths strictly
        /// above it are cut (ties survive so lexicographic ordering can
        /// still settle them).
        fn bound(&mut self) -> Option<f64> {
            if self.found.len() < self.k {
                return None;
            }
            self.found
                .sort_by(compare_routes);
            Some(self.found[self.k - 1].total_distance)
        }

        fn visit(&mut self, node: NodeId, accumulated: f64) {
            if let Some(bound) = self.bound() {
                if accumulated > bound {
                    return;
                }
            }
            if node == self.dst {
                self.found.push(Route::new(self.path.clone(), accumulated));
                return;
            }
            for &(next, d) in &self.adj[&node] {
                if self.on_path.contains(&next) {
                    continue;
                }
                let is_endpoint = next == self.dst;
                if !is_endpoint
                    && (self.layout.role_of(next) != Some(Role::Router)
                        || self.barred.contains(&next))
                {
                    continue;
                }
                self.path.push(next);
                self.on_path.insert(next);
                self.visit(next, accumulated + d);
                self.on_path.remove(&next);
                self.path.pop();
            }
        }
    }

    let mut search = Search {
        adj: &adj,
        layout,
        barred,
        dst,
        k,
        path: vec![src],
        on_path: [src].into(),
        found: Vec::new(),
    };
    search.visit(src, 0.0);

    let mut found = search.found;
    if found.is_empty() {
        return Err(no_route);
    }
    found.sort_by(compare_routes);
    found.truncate(k);
    Ok(found)
}

/// [`discover_routes_avoiding`] with nothing barred.
pub fn discover_routes(
    layout: &NetworkLayout,
    src: NodeId,
    dst: NodeId,
    k: usize,
) -> Result<Vec<Route>, RoutingError> {
    discover_routes_avoiding(layout, src, dst, k, &BTreeSet::new())
}

// ===== request flood =====

/// A route request in flight. `path` ends at the node that (re)broadcast
/// it; `accumulated_distance` covers exactly the links of `path`.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteRequest {
    pub origin: NodeId,
    pub destination: NodeId,
    pub request_id: u64,
    pub path: Vec<NodeId>,
    pub accumulated_distance: f64,
}

impl RouteRequest {
    /// Fresh broadcast as the origin emits it.
    pub fn originate(origin: NodeId, destination: NodeId, request_id: u64) -> Self {
        RouteRequest {
            origin,
            destination,
            request_id,
            path: vec![origin],
            accumulated_distance: 0.0,
        }
    }

    pub fn sender(&self) -> NodeId {
        *self.path.last().expect("request path never empty")
    }
}

/// Per-network discovery state: which `(origin, request_id)` pairs each
/// node has already handled.
#[derive(Debug, Clone, Default)]
pub struct DiscoveryState {
    seen: BTreeMap<NodeId, BTreeSet<(NodeId, u64)>>,
}

impl DiscoveryState {
    pub fn mark_seen(&mut self, node: NodeId, origin: NodeId, request_id: u64) -> bool {
        self.seen.entry(node).or_default().insert((origin, request_id))
    }

    pub fn has_seen(&self, node: NodeId, origin: NodeId, request_id: u64) -> bool {
        self.seen
            .get(&node)
            .is_some_and(|s| s.contains(&(origin, request_id)))
    }
}

/// What a node does with an incoming request.
#[derive(Debug, Clone, PartialEq)]
pub enum RreqAction {
    /// Duplicate, loop, or a leaf that is not the destination.
    Drop,
    /// The destination answers with the completed route.
    Reply(Route),
    /// A router rebroadcasts the extended request to `recipients`.
    Forward {
        request: RouteRequest,
        recipients: Vec<NodeId>,
    },
}

/// Handle one request arrival at `node`. Appends the node and its link
/// distance, then: duplicates are dropped, the destination replies,
/// routers rebroadcast to every neighbor except the sender, and anything
/// else drops.
pub fn process_rreq(
    layout: &NetworkLayout,
    node: NodeId,
    request: &RouteRequest,
    state: &mut DiscoveryState,
) -> RreqAction {
    if state.has_seen(node, request.origin, request.request_id) {
        return RreqAction::Drop;
    }
    state.mark_seen(node, request.origin, request.request_id);
    if request.path.contains(&node) {
        return RreqAction::Drop;
    }
    let sender = request.sender();
    let Some(link) = layout.node_distance(sender, node) else {
        return RreqAction::Drop;
    };
    let accumulated = request.accumulated_distance + link;
    let mut path = request.path.clone();
    path.push(node);

    if node == request.destination {
        return RreqAction::Reply(Route::new(path, accumulated));
    }
    if layout.role_of(node) != Some(Role::Router) {
        return RreqAction::Drop;
    }
    let recipients: Vec<NodeId> = layout
        .neighbors_of(node)
        .into_iter()
        .filter(|&n| n != sender)
        .collect();
    if recipients.is_empty() {
        return RreqAction::Drop;
    }
    RreqAction::Forward {
        request: RouteRequest {
            origin: request.origin,
            destination: request.destination,
            request_id: request.request_id,
            path,
            accumulated_distance: accumulated,
        },
        recipients,
    }
}

/// Result of driving one request flood to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct FloodOutcome {
    /// First reply to reach the origin, if the destination was reachable.
    pub reply: Option<Route>,
    /// Point-to-point transmissions spent, for protocol-overhead checks.
    pub transmissions: usize,
}

/// Drive a full request flood with deliveries processed in ascending
/// accumulated-distance order (radio time of flight is proportional to
/// distance, so nearer copies arrive first). With duplicate suppression
/// this makes the first reply the shortest admissible route.
pub fn flood_discover(
    layout: &NetworkLayout,
    src: NodeId,
    dst: NodeId,
    request_id: u64,
) -> FloodOutcome {
    // Max-heap on Reverse-ordered key: (arrival distance, path, recipient).
    #[derive(PartialEq)]
    struct Delivery {
        arrival: f64,
        request: RouteRequest,
        recipient: NodeId,
    }
    impl Eq for Delivery {}
    impl Ord for Delivery {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.arrival
                .partial_cmp(&other.arrival)
                .expect("arrival distances are finite")
                .then_with(|| self.request.path.cmp(&other.request.path))
                .then_with(|| self.recipient.cmp(&other.recipient))
                .reverse()
        }
    }
    impl PartialOrd for Delivery {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut state = DiscoveryState::default();
    state.mark_seen(src, src, request_id);
    let mut queue = BinaryHeap::new();
    let mut transmissions = 0usize;

    let seed = RouteRequest::originate(src, dst, request_id);
    for neighbor in layout.neighbors_of(src) {
        let link = layout.node_distance(src, neighbor).expect("neighbor exists");
        transmissions += 1;
        queue.push(Delivery {
            arrival: link,
            request: seed.clone(),
            recipient: neighbor,
        });
    }

    let mut reply = None;
    while let Some(Delivery {
        request, recipient, ..
    }) = queue.pop()
    {
        match process_rreq(layout, recipient, &request, &mut state) {
            RreqAction::Drop => {}
            RreqAction::Reply(route) => {
                reply = Some(route);
                break;
            }
            RreqAction::Forward {
                request,
                recipients,
            } => {
                for next in recipients {
                    let link = layout
                        .node_distance(request.sender(), next)
                        .expect("recipient is a neighbor");
                    transmissions += 1;
                    queue.push(Delivery {
                        arrival: request.accumulated_distance + link,
                        request: request.clone(),
                        recipient: next,
                    });
                }
            }
        }
    }
    FloodOutcome {
        reply,
        transmissions,
    }
}

// ===== selection and failure handling =====

/// Pick the lowest-ranked candidate whose battery-powered members —
/// intermediates and destination alike — are all above threshold.
/// Mains-powered nodes (the coordinator) are exempt.
pub fn select_route(
    candidates: &[Route],
    batteries: &BTreeMap<NodeId, Battery>,
    threshold: f64,
) -> Result<Route, RoutingError> {
    let fallback = candidates
        .first()
        .expect("select_route needs at least one candidate");
    let usable = |route: &Route| {
        route.path.iter().all(|id| {
            batteries
                .get(id)
                .map_or(false, |b| !is_depleted(b, threshold))
        })
    };
    candidates
        .iter()
        .find(|r| usable(r))
        .cloned()
        .ok_or(RoutingError::AllRoutesDepleted {
            src: fallback.source(),
            dst: fallback.destination(),
        })
}

/// React to a depletion on the active route: rediscover with the depleted
/// nodes barred from forwarding, then select among the survivors. The
/// caller records the failover event and activates the result on the next
/// tick.
pub fn on_route_failure(
    layout: &NetworkLayout,
    src: NodeId,
    dst: NodeId,
    depleted: &BTreeSet<NodeId>,
    k: usize,
    batteries: &BTreeMap<NodeId, Battery>,
    threshold: f64,
) -> Result<Route, RoutingError> {
    let candidates = discover_routes_avoiding(layout, src, dst, k, depleted)
        .map_err(|_| RoutingError::AllRoutesDepleted { src, dst })?;
    select_route(&candidates, batteries, threshold)
}

/// Hop count times the per-hop transmission time.
pub fn end_to_end_delay(route: &Route, per_hop_time_s: f64) -> f64 {
    route.hop_count() as f64 * per_hop_time_s
}

/// The route's total as the reference tables print it: each leg rounded
/// half-up to four decimals first, then summed. Summing printed figures
/// keeps the total consistent with an itemized leg listing (the raw f64
/// total can land one unit lower, e.g. 308.3400 vs the tabulated
/// 308.3401).
pub fn printed_total_m(route: &Route, layout: &NetworkLayout) -> String {
    let total: i128 = route
        .path
        .windows(2)
        .map(|pair| {
            let d = layout
                .node_distance(pair[0], pair[1])
                .expect("route legs lie inside the layout");
            numfmt::units(d, 4)
        })
        .sum();
    numfmt::from_units(total, 4)
}

/// CSV export: `rank,path,links,intermediates,total_distance_m`, ranks
/// 1-based in the given order, paths dash-joined, totals as printed-leg
/// sums (see [`printed_total_m`]).
pub fn write_routes_csv<W: Write>(
    routes: &[Route],
    layout: &NetworkLayout,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "rank,path,links,intermediates,total_distance_m")?;
    for (i, route) in routes.iter().enumerate() {
        let intermediates = route
            .intermediates()
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join("-");
        writeln!(
            out,
            "{},{},{},{},{}",
            i + 1,
            route.dashed(),
            route.hop_count(),
            intermediates,
            printed_total_m(route, layout)
        )?;
    }
    Ok(())
}
