//! Command-line driver: run scenarios, print route/neighbor/energy
//! tables, compare coordinator placements, and fit layouts from distance
//! constraints.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error (no route, routes
//! exhausted mid-run, no feasible layout, unreadable inputs).

use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use meshlab::engine::{compare_placements, RunStatus};
use meshlab::report::{
    render_comparison, render_energy_map, render_neighbor_table, render_route_summary,
    write_run_directory,
};
use meshlab::routing::discover_routes;
use meshlab::scenario::{resolve, Scenario};
use meshlab::topology::{
    build_neighbor_table, fit_layout, uniform_voltages, DistanceConstraint, FitOptions, Position,
};

#[derive(Parser)]
#[command(
    name = "meshlab",
    version,
    about = "Deterministic mesh-network lifetime simulator"
)]
struct Cli {
    /// Seed for every randomized step (layout fitting starts).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report directory.
    Run {
        /// Builtin name (center-v1, center-v2, corner-v1, corner-v2) or
        /// path to a scenario file.
        #[arg(long)]
        scenario: String,
        /// Report directory; defaults to $MESHLAB_OUT/<label> or
        /// ./meshlab_out/<label>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the ranked shortest routes of a scenario.
    Routes {
        #[arg(long)]
        scenario: String,
        /// How many routes to list.
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Print the neighbor table with fresh batteries.
    Neighbors {
        #[arg(long)]
        scenario: String,
    },
    /// Run a scenario and print the final energy map.
    EnergyMap {
        #[arg(long)]
        scenario: String,
    },
    /// Run several scenarios and rank their coordinator placements.
    Compare {
        /// Comma-separated scenario names or paths (at least two).
        #[arg(long, value_delimiter = ',')]
        scenarios: Vec<String>,
    },
    /// Fit node coordinates to pairwise distance constraints.
    FitLayout {
        /// CSV of constraints: a,b,distance_m (header optional).
        #[arg(long)]
        constraints: PathBuf,
        /// Pinned position of node 1, as x,y.
        #[arg(long, default_value = "300,300")]
        anchor: String,
        /// Output layout file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = meshlab::topology::DEFAULT_AREA_SIDE)]
        area_side: f64,
        #[arg(long, default_value_t = meshlab::topology::DEFAULT_RADIO_RANGE)]
        radio_range: f64,
    },
}

#[derive(Debug)]
enum CliFailure {
    Usage(String),
    Runtime(String),
}

fn runtime(e: impl Display) -> CliFailure {
    CliFailure::Runtime(e.to_string())
}

/// Command output; exits quietly once the consumer has closed the pipe
/// (`meshlab neighbors | head` must not panic).
fn emit(text: impl Display) {
    if write!(std::io::stdout(), "{text}").is_err() {
        std::process::exit(0);
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliFailure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliFailure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliFailure> {
    match cli.command {
        Command::Run { scenario, out } => cmd_run(&scenario, out),
        Command::Routes { scenario, k } => cmd_routes(&scenario, k),
        Command::Neighbors { scenario } => cmd_neighbors(&scenario),
        Command::EnergyMap { scenario } => cmd_energy_map(&scenario),
        Command::Compare { scenarios } => cmd_compare(&scenarios),
        Command::FitLayout {
            constraints,
            anchor,
            out,
            area_side,
            radio_range,
        } => cmd_fit_layout(&constraints, &anchor, &out, area_side, radio_range, cli.seed),
    }
}

fn resolve_out(flag: Option<PathBuf>, label: &str) -> PathBuf {
    match flag {
        Some(dir) => dir,
        None => std::env::var_os("MESHLAB_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("meshlab_out"))
            .join(label),
    }
}

fn cmd_run(arg: &str, out: Option<PathBuf>) -> Result<(), CliFailure> {
    let scenario = resolve(arg).map_err(runtime)?;
    let report = scenario.run().map_err(runtime)?;
    let dir = resolve_out(out, &scenario.label);
    write_run_directory(&report, &scenario.label, &scenario.notes, &dir).map_err(runtime)?;
    let routes: Vec<String> = report
        .route_history
        .iter()
        .map(|a| a.route.dashed())
        .collect();
    emit(format_args!(
        "{}: {} packets delivered, routes [{}]\n",
        scenario.label,
        report.delivered_packets,
        routes.join(", ")
    ));
    if let Some(tick) = report.first_failover_tick() {
        emit(format_args!("first failover at tick {tick}\n"));
    }
    emit(format_args!("report written to {}\n", dir.display()));
    match report.status {
        RunStatus::Completed => Ok(()),
        RunStatus::RoutesExhausted { tick } => Err(CliFailure::Runtime(format!(
            "routes exhausted at tick {tick}; partial report kept"
        ))),
    }
}

fn cmd_routes(arg: &str, k: usize) -> Result<(), CliFailure> {
    if k == 0 {
        return Err(CliFailure::Usage("--k must be at least 1".to_string()));
    }
    let scenario = resolve(arg).map_err(runtime)?;
    let routes =
        discover_routes(&scenario.layout, scenario.src, scenario.dst, k).map_err(runtime)?;
    emit(render_route_summary(&routes, &scenario.layout));
    for note in &scenario.notes {
        emit(format_args!("note: {note}\n"));
    }
    Ok(())
}

fn cmd_neighbors(arg: &str) -> Result<(), CliFailure> {
    let scenario = resolve(arg).map_err(runtime)?;
    let voltages = uniform_voltages(&scenario.layout, scenario.config.initial_voltage);
    let table = build_neighbor_table(&scenario.layout, &voltages).map_err(runtime)?;
    emit(render_neighbor_table(&table));
    Ok(())
}

fn cmd_energy_map(arg: &str) -> Result<(), CliFailure> {
    let scenario = resolve(arg).map_err(runtime)?;
    let report = scenario.run().map_err(runtime)?;
    emit(render_energy_map(&report));
    match report.status {
        RunStatus::Completed => Ok(()),
        RunStatus::RoutesExhausted { tick } => Err(CliFailure::Runtime(format!(
            "routes exhausted at tick {tick}; map shows the state at the stop"
        ))),
    }
}

fn cmd_compare(args: &[String]) -> Result<(), CliFailure> {
    if args.len() < 2 {
        return Err(CliFailure::Usage(
            "--scenarios needs at least two comma-separated entries".to_string(),
        ));
    }
    let scenarios: Vec<Scenario> = args
        .iter()
        .map(|a| resolve(a).map_err(runtime))
        .collect::<Result<_, _>>()?;
    let first = &scenarios[0];
    for s in &scenarios[1..] {
        if s.src != first.src || s.dst != first.dst {
            return Err(CliFailure::Runtime(format!(
                "scenarios disagree on endpoints: {} runs {} -> {}, {} runs {} -> {}",
                first.label, first.src, first.dst, s.label, s.src, s.dst
            )));
        }
    }
    let layouts: Vec<(String, _)> = scenarios
        .iter()
        .map(|s| (s.label.clone(), s.layout.clone()))
        .collect();
    let rows = compare_placements(&layouts, first.src, first.dst, &first.config).map_err(runtime)?;
    emit(render_comparison(&rows));
    Ok(())
}

fn parse_anchor(text: &str) -> Result<Position, CliFailure> {
    let bad = || {
        CliFailure::Usage(format!(
            "--anchor expects x,y (two numbers), got {text:?}"
        ))
    };
    let (x, y) = text.split_once(',').ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    Ok(Position::new(x, y))
}

fn parse_constraints(text: &str) -> Result<Vec<DistanceConstraint>, CliFailure> {
    let mut constraints = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CliFailure::Runtime(format!(
                "constraints line {}: expected a,b,distance_m, got {line:?}",
                i + 1
            )));
        }
        let parsed: Option<(u32, u32, f64)> = (|| {
            Some((
                fields[0].parse().ok()?,
                fields[1].parse().ok()?,
                fields[2].parse().ok()?,
            ))
        })();
        match parsed {
            Some((a, b, d)) => constraints.push(DistanceConstraint::new(a, b, d)),
            None if i == 0 => continue, // header row
            None => {
                return Err(CliFailure::Runtime(format!(
                    "constraints line {}: expected numbers, got {line:?}",
                    i + 1
                )))
            }
        }
    }
    Ok(constraints)
}

fn cmd_fit_layout(
    constraints_path: &PathBuf,
    anchor: &str,
    out: &PathBuf,
    area_side: f64,
    radio_range: f64,
    seed: u64,
) -> Result<(), CliFailure> {
    let anchor = parse_anchor(anchor)?;
    let text = std::fs::read_to_string(constraints_path).map_err(|e| {
        CliFailure::Runtime(format!(
            "could not read {}: {e}",
            constraints_path.display()
        ))
    })?;
    let constraints = parse_constraints(&text)?;
    let options = FitOptions {
        area_side,
        radio_range,
        anchor,
        seed,
        ..FitOptions::default()
    };
    let layout = fit_layout(&constraints, &options).map_err(runtime)?;
    layout.save(out).map_err(runtime)?;
    emit(format_args!(
        "fitted {} nodes from {} constraints, layout written to {}\n",
        layout.nodes.len(),
        constraints.len(),
        out.display()
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_parsing_skips_a_header_row() {
        let parsed = parse_constraints("a,b,distance_m\n1,2,122.0656\n2,8,100\n").unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0], DistanceConstraint::new(1, 2, 122.0656));
        let parsed = parse_constraints("1,2,50\n").unwrap();
        assert_eq!(parsed.len(), 1);
        assert!(parse_constraints("1,2\n").is_err());
        assert!(parse_constraints("1,2,50\nx,y,z\n").is_err());
    }

    #[test]
    fn anchor_parsing_accepts_spaces_and_rejects_garbage() {
        let p = parse_anchor("0, 600").unwrap();
        assert_eq!((p.x, p.y), (0.0, 600.0));
        assert!(parse_anchor("300").is_err());
        assert!(parse_anchor("a,b").is_err());
    }
}
