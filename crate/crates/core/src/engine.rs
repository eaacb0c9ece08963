//! Time-stepped simulation loop. One data packet per tick travels the
//! active route; every battery drains by its role's per-tick cost; when an
//! active-route node drops below threshold the engine rediscovers around
//! the depleted set and switches routes on the next tick.
//!
//! Everything here is deterministic: identical inputs produce identical
//! reports, down to the bytes of the exported files.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{
    apply_tick_costs, energy_map, is_depleted, Battery, DecayModel, DecayModelError, EnergyMap,
    RouteLoad,
};
use crate::routing::{
    discover_routes, end_to_end_delay, on_route_failure, select_route, Route, RoutingError,
};
use crate::topology::{build_neighbor_table, LayoutError, NeighborTable, NetworkLayout, NodeId};

/// Inert radio parameters carried through to summaries. The received-power
/// figure is kept verbatim from the source measurement tables even though
/// it is physically implausible as written (a positive dBm at the
/// receiver); nothing computes with these values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadioMetadata {
    pub frequency: String,
    pub modulation: String,
    pub transmit_power: String,
    pub receive_power: String,
}

impl Default for RadioMetadata {
    fn default() -> Self {
        RadioMetadata {
            frequency: "2.4 GHz".to_string(),
            modulation: "On/Off Keying".to_string(),
            transmit_power: "0.01 W".to_string(),
            receive_power: "60 dbm".to_string(),
        }
    }
}

/// Simulation parameters. Defaults describe the reference setup: 20000
/// transmissions of 0.02 s each (400 s of traffic), 3.292 V coin cells
/// against a 3.3 V reference, two ranked routes, traces sampled every 100
/// ticks. The depletion threshold lives on [`DecayModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub total_transmissions: u64,
    pub tick_duration_s: f64,
    pub bits_per_packet: u64,
    pub initial_voltage: f64,
    pub reference_voltage: f64,
    pub decay: DecayModel,
    pub k_routes: usize,
    pub sample_stride: u64,
    pub metadata: RadioMetadata,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            total_transmissions: 20_000,
            tick_duration_s: 0.02,
            bits_per_packet: 2_000,
            initial_voltage: 3.292,
            reference_voltage: 3.3,
            decay: DecayModel::default(),
            k_routes: 2,
            sample_stride: 100,
            metadata: RadioMetadata::default(),
        }
    }
}

impl SimConfig {
    pub fn threshold(&self) -> f64 {
        self.decay.threshold
    }

    /// Traffic duration in seconds (400 s under defaults).
    pub fn total_sim_time_s(&self) -> f64 {
        self.total_transmissions as f64 * self.tick_duration_s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tick_duration_s.is_finite() && self.tick_duration_s > 0.0) {
            return Err(ConfigError::BadTickDuration(self.tick_duration_s));
        }
        if !(self.initial_voltage.is_finite() && self.initial_voltage > 0.0) {
            return Err(ConfigError::BadInitialVoltage(self.initial_voltage));
        }
        if !(self.reference_voltage.is_finite() && self.reference_voltage > 0.0) {
            return Err(ConfigError::BadReferenceVoltage(self.reference_voltage));
        }
        if self.k_routes == 0 {
            return Err(ConfigError::ZeroRoutes);
        }
        if self.sample_stride == 0 {
            return Err(ConfigError::ZeroStride);
        }
        self.decay.validate()?;
        if self.decay.threshold >= self.initial_voltage {
            return Err(ConfigError::ThresholdAboveInitial {
                threshold: self.decay.threshold,
                initial: self.initial_voltage,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("tick duration must be a positive number of seconds, got {0}")]
    BadTickDuration(f64),
    #[error("initial voltage must be positive, got {0}")]
    BadInitialVoltage(f64),
    #[error("reference voltage must be positive, got {0}")]
    BadReferenceVoltage(f64),
    #[error("k_routes must be at least 1")]
    ZeroRoutes,
    #[error("sample_stride must be at least 1")]
    ZeroStride,
    #[error("depletion threshold {threshold} must lie below the initial voltage {initial}")]
    ThresholdAboveInitial { threshold: f64, initial: f64 },
    #[error(transparent)]
    Decay(#[from] DecayModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationReason {
    Initial,
    Failover,
}

/// One entry of the route history: which route went live, when, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteActivation {
    pub tick: u64,
    pub route: Route,
    pub reason: ActivationReason,
}

/// A depletion that knocked out the active route, with the route members
/// that were below threshold when it fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailoverEvent {
    pub tick: u64,
    pub depleted: BTreeSet<NodeId>,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    /// All transmissions delivered.
    Completed,
    /// Every candidate route contained a depleted node; the report covers
    /// the ticks up to and including `tick`.
    RoutesExhausted { tick: u64 },
}

/// Everything a run produces. Voltage traces are sampled (tick 0 plus
/// every `sample_stride`-th tick); final state is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub layout: NetworkLayout,
    pub src: NodeId,
    pub dst: NodeId,
    pub status: RunStatus,
    pub delivered_packets: u64,
    pub sample_ticks: Vec<u64>,
    pub voltage_traces: BTreeMap<NodeId, Vec<f64>>,
    pub route_history: Vec<RouteActivation>,
    /// End-to-end delay in seconds for each route in `route_history`.
    pub delays_s: Vec<f64>,
    pub failover_events: Vec<FailoverEvent>,
    pub final_voltages: BTreeMap<NodeId, f64>,
    pub final_energy_map: EnergyMap,
    pub final_neighbor_table: NeighborTable,
}

impl SimReport {
    /// Tick of the first route failure — the network-lifetime proxy.
    pub fn first_failover_tick(&self) -> Option<u64> {
        self.failover_events.first().map(|e| e.tick)
    }

    pub fn active_route(&self) -> Option<&Route> {
        self.route_history.last().map(|a| &a.route)
    }

    /// Mean final voltage across battery-powered nodes (the mains
    /// coordinator is excluded).
    pub fn mean_final_battery_voltage(&self) -> f64 {
        let coordinator = self.layout.coordinator();
        let finals: Vec<f64> = self
            .final_voltages
            .iter()
            .filter(|(id, _)| **id != coordinator)
            .map(|(_, v)| *v)
            .collect();
        if finals.is_empty() {
            return 0.0;
        }
        finals.iter().sum::<f64>() / finals.len() as f64
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("source {src} is not the coordinator")]
    SourceNotCoordinator { src: NodeId },
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

/// Run a simulation with scripted depletions: at each listed tick the
/// listed node's battery is forced to 0 V (after normal costs, before the
/// depletion check). An empty list gives plain [`run`] behavior.
pub fn run_with_forced_depletions(
    layout: &NetworkLayout,
    src: NodeId,
    dst: NodeId,
    config: &SimConfig,
    forced: &[(u64, NodeId)],
) -> Result<SimReport, EngineError> {
    config.validate()?;
    layout.validate()?;
    if layout.role_of(src) != Some(crate::topology::Role::Coordinator) {
        return Err(EngineError::SourceNotCoordinator { src });
    }

    let roles: BTreeMap<NodeId, crate::topology::Role> =
        layout.nodes.iter().map(|n| (n.id, n.role)).collect();
    let mut batteries: BTreeMap<NodeId, Battery> = layout
        .nodes
        .iter()
        .map(|n| {
            let b = if n.role == crate::topology::Role::Coordinator {
                Battery::mains(config.initial_voltage)
            } else {
                Battery::coin(config.initial_voltage)
            };
            (n.id, b)
        })
        .collect();

    let candidates = discover_routes(layout, src, dst, config.k_routes)?;
    let threshold = config.threshold();

    let mut route_history = Vec::new();
    let mut failover_events = Vec::new();
    let mut status = RunStatus::Completed;
    let mut delivered = 0u64;

    // Participation set: every node that has served as an intermediate on
    // any activated route keeps paying the forwarding cost — joining a
    // route commits the node's radio for the rest of the run.
    let mut load = RouteLoad::new([], Some(dst));
    let mut active: Option<Route> = None;
    match select_route(&candidates, &batteries, threshold) {
        Ok(route) => {
            load.forwarders.extend(route.intermediates().iter().copied());
            route_history.push(RouteActivation {
                tick: 0,
                route: route.clone(),
                reason: ActivationReason::Initial,
            });
            active = Some(route);
        }
        Err(_) => {
            status = RunStatus::RoutesExhausted { tick: 0 };
        }
    }

    let mut sample_ticks = Vec::new();
    let mut traces: BTreeMap<NodeId, Vec<f64>> =
        layout.nodes.iter().map(|n| (n.id, Vec::new())).collect();
    let record_sample = |tick: u64,
                             batteries: &BTreeMap<NodeId, Battery>,
                             sample_ticks: &mut Vec<u64>,
                             traces: &mut BTreeMap<NodeId, Vec<f64>>| {
        sample_ticks.push(tick);
        for (id, battery) in batteries {
            traces.get_mut(id).expect("trace per node").push(battery.voltage);
        }
    };
    record_sample(0, &batteries, &mut sample_ticks, &mut traces);

    if active.is_some() {
        for tick in 1..=config.total_transmissions {
            // The packet travels the route that was active when the tick
            // began; this tick's decay cannot retroactively stop it.
            delivered += 1;
            apply_tick_costs(&mut batteries, &roles, &load, &config.decay);
            for &(when, node) in forced {
                if when == tick {
                    if let Some(b) = batteries.get_mut(&node) {
                        if !b.mains_powered {
                            b.voltage = 0.0;
                        }
                    }
                }
            }
            if tick % config.sample_stride == 0 {
                record_sample(tick, &batteries, &mut sample_ticks, &mut traces);
            }

            let route = active.as_ref().expect("loop runs only with a route");
            let tripped: BTreeSet<NodeId> = route
                .path
                .iter()
                .copied()
                .filter(|id| {
                    batteries
                        .get(id)
                        .is_some_and(|b| is_depleted(b, threshold))
                })
                .collect();
            if tripped.is_empty() {
                continue;
            }
            failover_events.push(FailoverEvent {
                tick,
                depleted: tripped,
            });
            let depleted_global: BTreeSet<NodeId> = batteries
                .iter()
                .filter(|(_, b)| is_depleted(b, threshold))
                .map(|(id, _)| *id)
                .collect();
            match on_route_failure(
                layout,
                src,
                dst,
                &depleted_global,
                config.k_routes,
                &batteries,
                threshold,
            ) {
                Ok(next) => {
                    load.forwarders.extend(next.intermediates().iter().copied());
                    route_history.push(RouteActivation {
                        tick,
                        route: next.clone(),
                        reason: ActivationReason::Failover,
                    });
                    active = Some(next);
                }
                Err(_) => {
                    status = RunStatus::RoutesExhausted { tick };
                    break;
                }
            }
        }
    }

    let delays_s = route_history
        .iter()
        .map(|a| end_to_end_delay(&a.route, config.tick_duration_s))
        .collect();
    let final_voltages: BTreeMap<NodeId, f64> =
        batteries.iter().map(|(id, b)| (*id, b.voltage)).collect();
    let final_neighbor_table =
        build_neighbor_table(layout, &final_voltages).expect("layout nodes all have voltages");

    Ok(SimReport {
        config: config.clone(),
        layout: layout.clone(),
        src,
        dst,
        status,
        delivered_packets: delivered,
        sample_ticks,
        voltage_traces: traces,
        route_history,
        delays_s,
        failover_events,
        final_voltages,
        final_energy_map: energy_map(&batteries, config.reference_voltage),
        final_neighbor_table,
    })
}

/// Run a full simulation: discover routes, deliver one packet per tick,
/// decay batteries, fail over past depleted nodes. `Ok` covers both clean
/// completion and mid-run route exhaustion (see [`RunStatus`]); `Err` is
/// reserved for runs that cannot start at all.
pub fn run(
    layout: &NetworkLayout,
    src: NodeId,
    dst: NodeId,
    config: &SimConfig,
) -> Result<SimReport, EngineError> {
    run_with_forced_depletions(layout, src, dst, config, &[])
}

/// One row of the placement comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRow {
    pub label: String,
    /// `None` when the destination was unreachable in this layout.
    pub first_route: Option<Route>,
    pub initial_delay_s: Option<f64>,
    pub first_failover_tick: Option<u64>,
    pub mean_final_voltage: Option<f64>,
}

/// Run every labeled layout against the same source, destination, and
/// config, and rank the rows by first-route distance (unreachable layouts
/// sink to the bottom rather than aborting the comparison).
pub fn compare_placements(
    layouts: &[(String, NetworkLayout)],
    src: NodeId,
    dst: NodeId,
    config: &SimConfig,
) -> Result<Vec<PlacementRow>, EngineError> {
    assert!(layouts.len() >= 2, "comparison needs at least two layouts");
    let mut rows = Vec::new();
    for (label, layout) in layouts {
        match run(layout, src, dst, config) {
            Ok(report) => {
                let first = report.route_history.first();
                rows.push(PlacementRow {
                    label: label.clone(),
                    first_route: first.map(|a| a.route.clone()),
                    initial_delay_s: report.delays_s.first().copied(),
                    first_failover_tick: report.first_failover_tick(),
                    mean_final_voltage: Some(report.mean_final_battery_voltage()),
                });
            }
            Err(EngineError::Routing(RoutingError::NoRoute { .. })) => {
                rows.push(PlacementRow {
                    label: label.clone(),
                    first_route: None,
                    initial_delay_s: None,
                    first_failover_tick: None,
                    mean_final_voltage: None,
                });
            }
            Err(other) => return Err(other),
        }
    }
    rows.sort_by(|a, b| {
        match (&a.first_route, &b.first_route) {
            (Some(ra), Some(rb)) => ra
                .total_distance
                .partial_cmp(&rb.total_distance)
                .expect("distances are finite")
                .then_with(|| a.label.cmp(&b.label)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.label.cmp(&b.label),
        }
    });
    Ok(rows)
}
