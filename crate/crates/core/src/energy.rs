//! Battery model: linear per-tick voltage decay with a depletion
//! threshold, plus the percentage energy map used for placement plots.
//!
//! Every radio activity class costs a fixed number of volts per tick.
//! The defaults are calibrated against the bundled 20000-transmission
//! study endpoints: a router that forwards every packet ends at 1.3383 V,
//! an idle router at 1.6442 V, starting from a 3.292 V coin cell. Decay
//! being linear, those two endpoints pin `delta_forward` and
//! `delta_maintenance`; receive and idle costs sit below them (an end
//! device that only listens works a fraction as hard as a relaying
//! router).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfmt;
use crate::topology::{NodeId, Role};

/// Coin-cell voltage at the start of every bundled scenario.
pub const DEFAULT_INITIAL_VOLTAGE: f64 = 3.292;
/// Below this a battery-powered node is considered unable to route.
pub const DEFAULT_THRESHOLD: f64 = 1.6;
/// Full-scale voltage for the percentage energy map.
pub const DEFAULT_REFERENCE_VOLTAGE: f64 = 3.3;

/// (3.292 − 1.3383) V spread over 20000 forwarded packets.
pub const DEFAULT_DELTA_FORWARD: f64 = 9.7685e-5;
/// (3.292 − 1.6442) V spread over 20000 ticks of idle routing duty.
pub const DEFAULT_DELTA_MAINTENANCE: f64 = 8.239e-5;
/// Receiving one packet per tick: three quarters of maintenance duty —
/// the destination works less than any router but more than a silent
/// end device.
pub const DEFAULT_DELTA_RECEIVE: f64 = 6.17925e-5;
/// Idle end device: half of maintenance duty.
pub const DEFAULT_DELTA_IDLE: f64 = 4.1195e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub voltage: f64,
    pub initial_voltage: f64,
    /// Mains-powered nodes (the coordinator) never decay and never count
    /// as depleted.
    pub mains_powered: bool,
}

impl Battery {
    pub fn coin(initial_voltage: f64) -> Self {
        Battery {
            voltage: initial_voltage,
            initial_voltage,
            mains_powered: false,
        }
    }

    pub fn mains(nominal_voltage: f64) -> Self {
        Battery {
            voltage: nominal_voltage,
            initial_voltage: nominal_voltage,
            mains_powered: true,
        }
    }
}

/// Per-tick voltage costs by activity class, plus the routing threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    /// Carrying one packet on the active route (transmit or forward).
    pub delta_forward: f64,
    /// Staying ready to route without carrying this tick's packet.
    pub delta_maintenance: f64,
    /// Receiving the tick's packet as the route destination.
    pub delta_receive: f64,
    /// Listening only.
    pub delta_idle: f64,
    /// Voltage below which a battery node drops out of routing.
    pub threshold: f64,
}

impl Default for DecayModel {
    fn default() -> Self {
        DecayModel {
            delta_forward: DEFAULT_DELTA_FORWARD,
            delta_maintenance: DEFAULT_DELTA_MAINTENANCE,
            delta_receive: DEFAULT_DELTA_RECEIVE,
            delta_idle: DEFAULT_DELTA_IDLE,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DecayModelError {
    #[error(
        "decay rates must satisfy forward >= maintenance >= receive >= idle >= 0 \
         (got forward {delta_forward}, maintenance {delta_maintenance}, receive {delta_receive}, idle {delta_idle})"
    )]
    Unordered {
        delta_forward: f64,
        delta_maintenance: f64,
        delta_receive: f64,
        delta_idle: f64,
    },
    #[error("threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),
}

impl DecayModel {
    /// The class costs must be ordered by how hard the node works:
    /// forwarding ≥ maintenance ≥ receiving ≥ idling ≥ 0.
    pub fn validate(&self) -> Result<(), DecayModelError> {
        let ordered = self.delta_forward >= self.delta_maintenance
            && self.delta_maintenance >= self.delta_receive
            && self.delta_receive >= self.delta_idle
            && self.delta_idle >= 0.0;
        if !ordered {
            return Err(DecayModelError::Unordered {
                delta_forward: self.delta_forward,
                delta_maintenance: self.delta_maintenance,
                delta_receive: self.delta_receive,
                delta_idle: self.delta_idle,
            });
        }
        if !(self.threshold >= 0.0) {
            return Err(DecayModelError::NegativeThreshold(self.threshold));
        }
        Ok(())
    }
}

/// Which nodes carry route work during a tick. The engine accumulates
/// forwarders across every route activated so far: a router that once
/// served the traffic keeps its route state and duty cycle even after a
/// failover routes the packets elsewhere, which is what the calibrated
/// endpoint voltages assume.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RouteLoad {
    /// Intermediate hops of all activated routes (coordinator excluded by
    /// virtue of being mains powered, so listing it is harmless).
    pub forwarders: BTreeSet<NodeId>,
    /// The destination currently receiving one packet per tick.
    pub receiver: Option<NodeId>,
}

impl RouteLoad {
    pub fn new(forwarders: impl IntoIterator<Item = NodeId>, receiver: Option<NodeId>) -> Self {
        RouteLoad {
            forwarders: forwarders.into_iter().collect(),
            receiver,
        }
    }
}

/// Charge one tick of activity to every battery. Mains-powered nodes are
/// untouched; everything else pays its class cost and is clamped at 0 V.
pub fn apply_tick_costs(
    batteries: &mut BTreeMap<NodeId, Battery>,
    roles: &BTreeMap<NodeId, Role>,
    load: &RouteLoad,
    model: &DecayModel,
) {
    for (id, battery) in batteries.iter_mut() {
        if battery.mains_powered {
            continue;
        }
        let delta = if load.forwarders.contains(id) {
            model.delta_forward
        } else if load.receiver == Some(*id) {
            model.delta_receive
        } else {
            match roles.get(id) {
                Some(Role::EndDevice) => model.delta_idle,
                // Routers (and a hypothetical battery-powered network
                // head) keep the mesh alive even when off route.
                _ => model.delta_maintenance,
            }
        };
        battery.voltage = (battery.voltage - delta).max(0.0);
    }
}

/// Strictly below threshold counts as depleted; mains power never does.
pub fn is_depleted(battery: &Battery, threshold: f64) -> bool {
    !battery.mains_powered && battery.voltage < threshold
}

/// Remaining energy as a percentage of the reference (full-scale)
/// voltage, per node.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyMap {
    pub percent: BTreeMap<NodeId, f64>,
}

impl EnergyMap {
    pub fn get(&self, id: NodeId) -> Option<f64> {
        self.percent.get(&id).copied()
    }

    /// CSV export: `node_id,percent` with three decimals.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "node_id,percent")?;
        for (id, pct) in &self.percent {
            writeln!(out, "{},{}", id, numfmt::percent(*pct))?;
        }
        Ok(())
    }
}

pub fn energy_map(batteries: &BTreeMap<NodeId, Battery>, reference_voltage: f64) -> EnergyMap {
    assert!(
        reference_voltage > 0.0,
        "reference voltage must be positive, got {reference_voltage}"
    );
    EnergyMap {
        percent: batteries
            .iter()
            .map(|(&id, b)| (id, 100.0 * b.voltage / reference_voltage))
            .collect(),
    }
}
