//! Output shaping: text tables for the terminal, CSV plot data, and the
//! per-run report directory. All rendering is pure — the same report
//! always produces the same bytes.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::engine::{FailoverEvent, PlacementRow, RunStatus, SimConfig, SimReport};
use crate::numfmt;
use crate::routing::{printed_total_m, write_routes_csv, Route};
use crate::topology::{NeighborTable, NetworkLayout, NodeId};

/// A rendered table: ordered column labels plus formatted text cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRendering {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl fmt::Display for TableRendering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i < widths.len() {
                    widths[i] = widths[i].max(cell.len());
                }
            }
        }
        let render_line = |cells: &[String]| -> String {
            let mut line = String::new();
            for (i, cell) in cells.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                let width = widths.get(i).copied().unwrap_or(cell.len());
                line.push_str(&format!("{cell:<width$}"));
            }
            line.trim_end().to_string()
        };
        writeln!(f, "{}", render_line(&self.columns))?;
        for row in &self.rows {
            writeln!(f, "{}", render_line(row))?;
        }
        Ok(())
    }
}

/// Neighbor listing in the four-column form of the reference tables: one
/// row per (node, neighbor) pair, ENERGY being the node's own voltage.
pub fn render_neighbor_table(table: &NeighborTable) -> TableRendering {
    let columns = ["NODE", "NEIGHBOURS", "DISTANCES", "ENERGY"]
        .map(String::from)
        .to_vec();
    let rows = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.node.to_string(),
                r.neighbor.to_string(),
                numfmt::meters(r.distance),
                numfmt::volts(r.energy),
            ]
        })
        .collect();
    TableRendering { columns, rows }
}

fn rank_label(rank: usize) -> String {
    match rank {
        1 => "(First Route)".to_string(),
        2 => "(Second Route)".to_string(),
        3 => "(Third Route)".to_string(),
        4 => "(Fourth Route)".to_string(),
        5 => "(Fifth Route)".to_string(),
        n => format!("(Route {n})"),
    }
}

/// Leg-by-leg route listing: one row per link with its length, then a
/// `Sum` row carrying the total and the route's rank.
pub fn render_route_summary(routes: &[Route], layout: &NetworkLayout) -> TableRendering {
    let columns = ["LINK", "DISTANCE_M"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for (i, route) in routes.iter().enumerate() {
        // Sum the legs as printed so the total row always agrees with the
        // itemized figures above it.
        let mut total_units = 0i128;
        for pair in route.path.windows(2) {
            let d = layout
                .node_distance(pair[0], pair[1])
                .expect("route legs lie inside the layout");
            let leg_units = numfmt::units(d, 4);
            total_units += leg_units;
            rows.push(vec![
                format!("{}-{}", pair[0], pair[1]),
                numfmt::from_units(leg_units, 4),
            ]);
        }
        rows.push(vec![
            "Sum".to_string(),
            format!("{} {}", numfmt::from_units(total_units, 4), rank_label(i + 1)),
        ]);
    }
    TableRendering { columns, rows }
}

/// Placement comparison, one row per layout in the order produced by the
/// engine (already ranked by first-route distance).
pub fn render_comparison(rows: &[PlacementRow]) -> TableRendering {
    let columns = [
        "PLACEMENT",
        "FIRST_ROUTE",
        "DISTANCE_M",
        "LINKS",
        "DELAY_S",
        "FIRST_FAILOVER_TICK",
        "MEAN_FINAL_VOLTAGE",
    ]
    .map(String::from)
    .to_vec();
    let rendered = rows
        .iter()
        .map(|row| match &row.first_route {
            Some(route) => vec![
                row.label.clone(),
                route.dashed(),
                numfmt::meters(route.total_distance),
                route.hop_count().to_string(),
                row.initial_delay_s.map_or("-".to_string(), |d| numfmt::fixed(d, 2)),
                row.first_failover_tick
                    .map_or("-".to_string(), |t| t.to_string()),
                row.mean_final_voltage
                    .map_or("-".to_string(), numfmt::volts),
            ],
            None => vec![
                row.label.clone(),
                "no route".to_string(),
                "-".to_string(),
                "-".to_string(),
                "-".to_string(),
                "-".to_string(),
                "-".to_string(),
            ],
        })
        .collect();
    TableRendering {
        columns,
        rows: rendered,
    }
}

/// Final percentages alongside coordinates, for energy-map plotting.
pub fn render_energy_map(report: &SimReport) -> TableRendering {
    let columns = ["NODE", "PERCENT", "X", "Y"].map(String::from).to_vec();
    let rows = report
        .final_energy_map
        .percent
        .iter()
        .map(|(id, pct)| {
            let pos = report
                .layout
                .position_of(*id)
                .expect("energy map covers layout nodes");
            vec![
                id.to_string(),
                numfmt::percent(*pct),
                numfmt::meters(pos.x),
                numfmt::meters(pos.y),
            ]
        })
        .collect();
    TableRendering { columns, rows }
}

// ===== file emission =====

fn write_voltages_csv<W: Write>(report: &SimReport, mut out: W) -> io::Result<()> {
    writeln!(out, "tick,node_id,voltage_v")?;
    for (i, tick) in report.sample_ticks.iter().enumerate() {
        for (id, trace) in &report.voltage_traces {
            writeln!(out, "{},{},{}", tick, id, numfmt::volts(trace[i]))?;
        }
    }
    Ok(())
}

fn write_energy_map_csv<W: Write>(report: &SimReport, mut out: W) -> io::Result<()> {
    writeln!(out, "node_id,percent,x,y")?;
    for (id, pct) in &report.final_energy_map.percent {
        let pos = report
            .layout
            .position_of(*id)
            .expect("energy map covers layout nodes");
        writeln!(
            out,
            "{},{},{},{}",
            id,
            numfmt::percent(*pct),
            numfmt::meters(pos.x),
            numfmt::meters(pos.y)
        )?;
    }
    Ok(())
}

fn write_events_csv<W: Write>(report: &SimReport, mut out: W) -> io::Result<()> {
    // (tick, intra-tick order, event, detail); failovers precede the
    // activations they trigger.
    let mut events: Vec<(u64, u8, String, String)> = Vec::new();
    for activation in &report.route_history {
        let reason = match activation.reason {
            crate::engine::ActivationReason::Initial => "initial",
            crate::engine::ActivationReason::Failover => "failover",
        };
        events.push((
            activation.tick,
            1,
            "route_activated".to_string(),
            format!("{} {}", activation.route.dashed(), reason),
        ));
    }
    for FailoverEvent { tick, depleted } in &report.failover_events {
        let ids = depleted
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        events.push((*tick, 0, "failover".to_string(), format!("depleted {ids}")));
    }
    if let RunStatus::RoutesExhausted { tick } = report.status {
        events.push((
            tick,
            2,
            "routes_exhausted".to_string(),
            "no admissible route remains".to_string(),
        ));
    }
    events.sort();
    writeln!(out, "tick,event,detail")?;
    for (tick, _, event, detail) in events {
        writeln!(out, "{tick},{event},{detail}")?;
    }
    Ok(())
}

/// Write `voltages.csv` and `energy_map.csv` into `out_dir` (created if
/// missing) — the data behind voltage-decay curves and energy maps.
pub fn emit_plot_data(report: &SimReport, out_dir: impl AsRef<Path>) -> io::Result<()> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_voltages_csv(report, BufWriter::new(File::create(dir.join("voltages.csv"))?))?;
    write_energy_map_csv(
        report,
        BufWriter::new(File::create(dir.join("energy_map.csv"))?),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRoute<'a> {
    tick: u64,
    path: String,
    total_distance_m: String,
    links: usize,
    reason: &'a str,
    delay_s: f64,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    label: &'a str,
    status: &'a RunStatus,
    src: NodeId,
    dst: NodeId,
    delivered_packets: u64,
    first_failover_tick: Option<u64>,
    mean_final_battery_voltage: f64,
    route_history: Vec<SummaryRoute<'a>>,
    failover_events: &'a [FailoverEvent],
    notes: &'a [String],
    config: &'a SimConfig,
}

/// The `summary.json` document for a run: status, route history with
/// formatted distances, failover events, notes, and a config echo.
pub fn summary_json(report: &SimReport, label: &str, notes: &[String]) -> String {
    let summary = RunSummary {
        label,
        status: &report.status,
        src: report.src,
        dst: report.dst,
        delivered_packets: report.delivered_packets,
        first_failover_tick: report.first_failover_tick(),
        mean_final_battery_voltage: report.mean_final_battery_voltage(),
        route_history: report
            .route_history
            .iter()
            .zip(&report.delays_s)
            .map(|(a, delay)| SummaryRoute {
                tick: a.tick,
                path: a.route.dashed(),
                total_distance_m: printed_total_m(&a.route, &report.layout),
                links: a.route.hop_count(),
                reason: match a.reason {
                    crate::engine::ActivationReason::Initial => "initial",
                    crate::engine::ActivationReason::Failover => "failover",
                },
                delay_s: *delay,
            })
            .collect(),
        failover_events: &report.failover_events,
        notes,
        config: &report.config,
    };
    let mut text =
        serde_json::to_string_pretty(&summary).expect("run summary serializes");
    text.push('\n');
    text
}

/// Write the full report directory: `voltages.csv`, `energy_map.csv`,
/// `routes.csv`, `events.csv`, `neighbors.csv`, and `summary.json`.
pub fn write_run_directory(
    report: &SimReport,
    label: &str,
    notes: &[String],
    out_dir: impl AsRef<Path>,
) -> io::Result<()> {
    let dir = out_dir.as_ref();
    emit_plot_data(report, dir)?;

    let routes: Vec<Route> = report
        .route_history
        .iter()
        .map(|a| a.route.clone())
        .collect();
    write_routes_csv(
        &routes,
        &report.layout,
        BufWriter::new(File::create(dir.join("routes.csv"))?),
    )?;
    write_events_csv(report, BufWriter::new(File::create(dir.join("events.csv"))?))?;
    report
        .final_neighbor_table
        .write_csv(BufWriter::new(File::create(dir.join("neighbors.csv"))?))?;
    std::fs::write(dir.join("summary.json"), summary_json(report, label, notes))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::routing::discover_routes;
    use crate::scenario::{builtin, BuiltinScenario};
    use crate::topology::{build_neighbor_table, uniform_voltages};

    #[test]
    fn neighbor_rendering_matches_the_reference_form() {
        let scenario = builtin(BuiltinScenario::CenterV1);
        let voltages = uniform_voltages(&scenario.layout, 3.292);
        let table = build_neighbor_table(&scenario.layout, &voltages).unwrap();
        let rendered = render_neighbor_table(&table);
        assert_eq!(rendered.columns, ["NODE", "NEIGHBOURS", "DISTANCES", "ENERGY"]);
        assert_eq!(rendered.rows[0], ["1", "2", "122.0656", "3.2920"]);
        assert!(rendered.rows.iter().all(|r| r[3] == "3.2920"));
    }

    #[test]
    fn empty_neighbor_table_renders_header_only() {
        let table = NeighborTable { rows: Vec::new() };
        let rendered = render_neighbor_table(&table);
        assert!(rendered.rows.is_empty());
        assert_eq!(rendered.to_string(), "NODE  NEIGHBOURS  DISTANCES  ENERGY\n");
    }

    #[test]
    fn route_summary_lists_legs_and_ranked_sums() {
        let scenario = builtin(BuiltinScenario::CenterV1);
        let routes = discover_routes(&scenario.layout, scenario.src, scenario.dst, 2).unwrap();
        let rendered = render_route_summary(&routes, &scenario.layout);
        let text = rendered.to_string();
        assert!(text.contains("222.0656 (First Route)"));
        assert!(text.contains("308.3401 (Second Route)"));
        let has_leg = |link: &str, distance: &str| {
            text.lines()
                .any(|l| l.split_whitespace().collect::<Vec<_>>() == [link, distance])
        };
        assert!(has_leg("1-2", "122.0656"));
        assert!(has_leg("2-8", "100.0000"));
    }

    #[test]
    fn corner_first_route_legs_render_as_printed() {
        let scenario = builtin(BuiltinScenario::CornerV1);
        let routes = discover_routes(&scenario.layout, scenario.src, scenario.dst, 1).unwrap();
        let rendered = render_route_summary(&routes, &scenario.layout);
        let legs: Vec<&str> = rendered
            .rows
            .iter()
            .take(4)
            .map(|r| r[1].as_str())
            .collect();
        assert_eq!(legs, ["100.0000", "111.8034", "111.8034", "100.0000"]);
        assert!(rendered.rows[4][1].starts_with("423.6068"));
    }

    #[test]
    fn single_leg_route_sums_to_its_leg() {
        let scenario = builtin(BuiltinScenario::CenterV1);
        let route = Route::new(vec![NodeId(1), NodeId(2)], 122.0656);
        let rendered = render_route_summary(&[route], &scenario.layout);
        assert_eq!(rendered.rows.len(), 2);
        assert_eq!(rendered.rows[0][1], "122.0656");
        assert_eq!(rendered.rows[1][1], "122.0656 (First Route)");
    }

    #[test]
    fn plot_data_keeps_the_coordinator_flat() {
        let scenario = builtin(BuiltinScenario::CenterV1);
        let mut config = scenario.config.clone();
        config.total_transmissions = 200;
        let report = run(&scenario.layout, scenario.src, scenario.dst, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_plot_data(&report, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("voltages.csv")).unwrap();
        let coordinator_rows: Vec<&str> =
            text.lines().filter(|l| l.split(',').nth(1) == Some("1")).collect();
        assert_eq!(coordinator_rows.len(), 3);
        assert!(coordinator_rows.iter().all(|l| l.ends_with("3.2920")));
        let map = std::fs::read_to_string(dir.path().join("energy_map.csv")).unwrap();
        assert!(map.starts_with("node_id,percent,x,y\n"));
        assert!(map.lines().any(|l| l.starts_with("1,99.758,300.0000,300.0000")));
    }

    #[test]
    fn zero_tick_run_samples_initial_state_once() {
        let scenario = builtin(BuiltinScenario::CenterV1);
        let mut config = scenario.config.clone();
        config.total_transmissions = 0;
        let report = run(&scenario.layout, scenario.src, scenario.dst, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_plot_data(&report, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("voltages.csv")).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 15);
        assert!(rows.iter().all(|l| l.starts_with("0,") && l.ends_with("3.2920")));
    }

    #[test]
    fn run_directory_is_complete_and_deterministic() {
        let scenario = builtin(BuiltinScenario::CenterV2);
        let mut config = scenario.config.clone();
        config.total_transmissions = 300;
        let report = run(&scenario.layout, scenario.src, scenario.dst, &config).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_run_directory(&report, &scenario.label, &scenario.notes, a.path()).unwrap();
        write_run_directory(&report, &scenario.label, &scenario.notes, b.path()).unwrap();
        for name in [
            "voltages.csv",
            "energy_map.csv",
            "routes.csv",
            "events.csv",
            "neighbors.csv",
            "summary.json",
        ] {
            let left = std::fs::read(a.path().join(name)).unwrap();
            let right = std::fs::read(b.path().join(name)).unwrap();
            assert!(!left.is_empty(), "{name} is empty");
            assert_eq!(left, right, "{name} differs between identical writes");
        }
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(a.path().join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["label"], "center-v2");
        assert_eq!(summary["status"]["kind"], "completed");
        assert_eq!(summary["route_history"][0]["path"], "1-2-8");
    }

    #[test]
    fn events_file_orders_failovers_before_activations() {
        let scenario = builtin(BuiltinScenario::CenterV2);
        let report = scenario.run().unwrap();
        let mut buf = Vec::new();
        write_events_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "tick,event,detail");
        assert_eq!(lines[1], "0,route_activated,1-2-8 initial");
        assert!(lines[2].starts_with("17321,failover,depleted 2"));
        assert!(lines[3].starts_with("17321,route_activated,1-3-8 failover"));
    }
}
