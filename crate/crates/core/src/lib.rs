//! Deterministic simulator of battery-aware mesh routing, built around a
//! coordinator-placement study: a mains-powered coordinator talks to a
//! destination end device across battery-powered routers, routes are
//! discovered AODV-style by flooded distance-accumulating requests, and
//! linear per-tick decay eventually pushes forwarders below the 1.6 V
//! threshold, forcing a switch to the second shortest route.
//!
//! The crate ships two reference layouts (coordinator at the field
//! center and at the corner) plus four packaged scenarios over them, and
//! exports voltage traces, neighbor tables, ranked routes, and energy
//! maps as plain CSV/JSON.
//!
//! ```
//! use meshlab::routing::discover_routes;
//! use meshlab::scenario::{builtin, BuiltinScenario};
//!
//! let s = builtin(BuiltinScenario::CenterV1);
//! let routes = discover_routes(&s.layout, s.src, s.dst, 2).unwrap();
//! assert_eq!(routes[0].dashed(), "1-2-8");
//! assert_eq!(routes[1].dashed(), "1-3-8");
//! ```

pub mod energy;
pub mod engine;
pub mod numfmt;
pub mod reference;
pub mod report;
pub mod routing;
pub mod scenario;
pub mod topology;
