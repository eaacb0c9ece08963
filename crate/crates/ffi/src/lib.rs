//! C interface to the simulator: opaque handles, integer status codes,
//! caller-freed strings. The generated header lands in
//! `include/meshlab.h` at build time.
//!
//! Conventions: every function tolerates null pointers (`NULL_ARGUMENT`
//! comes back), out-parameters are written only on success (the one
//! exception is `meshlab_run`, which hands out a partial report alongside
//! `ROUTES_EXHAUSTED`), strings returned through `char **` belong to the
//! caller and must go back through `meshlab_string_free`, and the most
//! recent error's text is retrievable per thread via
//! `meshlab_last_error`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use meshlab::engine::{EngineError, RunStatus, SimReport};
use meshlab::report::{summary_json, write_run_directory};
use meshlab::routing::{discover_routes, write_routes_csv, RoutingError};
use meshlab::scenario::{builtin, load_scenario, BuiltinScenario, Scenario};
use meshlab::topology::NodeId;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshlabStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The name is not a packaged scenario.
    UnknownScenario = 3,
    /// Scenario file failed to load or validate.
    ScenarioError = 4,
    /// No admissible route between the endpoints.
    NoRoute = 5,
    /// Every candidate route contained a depleted node mid-run; the
    /// report out-parameter still carries the truncated run.
    RoutesExhausted = 6,
    /// Any other engine failure (bad config, invalid layout).
    EngineError = 7,
    /// Node id not present in the layout.
    UnknownNode = 8,
    /// Index or count argument outside the valid range.
    OutOfRange = 9,
    /// Filesystem failure while writing outputs.
    IoError = 10,
    /// Unexpected internal failure.
    Internal = 11,
}

/// Opaque loaded scenario.
pub struct MeshlabScenario {
    inner: Scenario,
}

/// Opaque finished run, with the scenario's label and notes attached.
pub struct MeshlabReport {
    report: SimReport,
    label: String,
    notes: Vec<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', "?");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(message).expect("nul bytes stripped"));
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

/// Text of the most recent error on this thread, or null if the last
/// call succeeded. The pointer stays valid until the next call into this
/// library from the same thread.
#[no_mangle]
pub extern "C" fn meshlab_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |s| s.as_ptr())
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn meshlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn guarded(f: impl FnOnce() -> MeshlabStatus) -> MeshlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            MeshlabStatus::Internal
        }
    }
}

/// # Safety
/// `p` must be null or a nul-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, MeshlabStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(MeshlabStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        MeshlabStatus::InvalidUtf8
    })
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, MeshlabStatus> {
    p.as_ref().ok_or_else(|| {
        set_error(format!("{what} is null"));
        MeshlabStatus::NullArgument
    })
}

fn require_out<T>(out: *mut T, what: &str) -> Result<(), MeshlabStatus> {
    if out.is_null() {
        set_error(format!("{what} is null"));
        Err(MeshlabStatus::NullArgument)
    } else {
        Ok(())
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> MeshlabStatus {
    *out = value;
    clear_error();
    MeshlabStatus::Ok
}

unsafe fn out_string(s: String, out: *mut *mut c_char) -> MeshlabStatus {
    let c = CString::new(s.replace('\0', "?")).expect("nul bytes stripped");
    write_out(out, c.into_raw())
}

// ===== scenarios =====

/// Materialize a packaged scenario by name: center-v1, center-v2,
/// corner-v1, or corner-v2.
#[no_mangle]
pub unsafe extern "C" fn meshlab_scenario_builtin(
    name: *const c_char,
    out: *mut *mut MeshlabScenario,
) -> MeshlabStatus {
    guarded(|| {
        let name = match str_arg(name, "name") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        match BuiltinScenario::from_name(name) {
            Some(kind) => {
                let handle = Box::new(MeshlabScenario {
                    inner: builtin(kind),
                });
                write_out(out, Box::into_raw(handle))
            }
            None => {
                set_error(format!(
                    "unknown builtin scenario {name:?} (expected center-v1, center-v2, corner-v1, corner-v2)"
                ));
                MeshlabStatus::UnknownScenario
            }
        }
    })
}

/// Load and validate a scenario file (JSON, layout resolved relative to
/// the file).
#[no_mangle]
pub unsafe extern "C" fn meshlab_scenario_load(
    path: *const c_char,
    out: *mut *mut MeshlabScenario,
) -> MeshlabStatus {
    guarded(|| {
        let path = match str_arg(path, "path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        match load_scenario(Path::new(path)) {
            Ok(inner) => write_out(out, Box::into_raw(Box::new(MeshlabScenario { inner }))),
            Err(e) => {
                set_error(e.to_string());
                MeshlabStatus::ScenarioError
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn meshlab_scenario_free(scenario: *mut MeshlabScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// The scenario's label; free with `meshlab_string_free`.
#[no_mangle]
pub unsafe extern "C" fn meshlab_scenario_label(
    scenario: *const MeshlabScenario,
    out: *mut *mut c_char,
) -> MeshlabStatus {
    guarded(|| {
        let scenario = match ref_arg(scenario, "scenario") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        out_string(scenario.inner.label.clone(), out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn meshlab_scenario_node_count(
    scenario: *const MeshlabScenario,
    out: *mut u32,
) -> MeshlabStatus {
    guarded(|| {
        let scenario = match ref_arg(scenario, "scenario") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        write_out(out, scenario.inner.layout.nodes.len() as u32)
    })
}

/// The scenario's `k` shortest routes as CSV
/// (`rank,path,links,intermediates,total_distance_m`); free the string
/// with `meshlab_string_free`.
#[no_mangle]
pub unsafe extern "C" fn meshlab_scenario_routes_csv(
    scenario: *const MeshlabScenario,
    k: u32,
    out: *mut *mut c_char,
) -> MeshlabStatus {
    guarded(|| {
        let scenario = match ref_arg(scenario, "scenario") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        if k == 0 {
            set_error("k must be at least 1");
            return MeshlabStatus::OutOfRange;
        }
        let s = &scenario.inner;
        match discover_routes(&s.layout, s.src, s.dst, k as usize) {
            Ok(routes) => {
                let mut buf = Vec::new();
                write_routes_csv(&routes, &scenario.inner.layout, &mut buf)
                    .expect("writing to memory");
                out_string(String::from_utf8(buf).expect("CSV is UTF-8"), out)
            }
            Err(e) => {
                set_error(e.to_string());
                MeshlabStatus::NoRoute
            }
        }
    })
}

// ===== runs =====

/// Run the scenario. On `OK` the report is complete; on
/// `ROUTES_EXHAUSTED` the report is still written to `out` and covers
/// the ticks up to the exhaustion. Other statuses leave `out` untouched.
#[no_mangle]
pub unsafe extern "C" fn meshlab_run(
    scenario: *const MeshlabScenario,
    out: *mut *mut MeshlabReport,
) -> MeshlabStatus {
    guarded(|| {
        let scenario = match ref_arg(scenario, "scenario") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        match scenario.inner.run() {
            Ok(report) => {
                let status = report.status;
                let handle = Box::new(MeshlabReport {
                    report,
                    label: scenario.inner.label.clone(),
                    notes: scenario.inner.notes.clone(),
                });
                let code = write_out(out, Box::into_raw(handle));
                match status {
                    RunStatus::Completed => code,
                    RunStatus::RoutesExhausted { tick } => {
                        set_error(format!("routes exhausted at tick {tick}"));
                        MeshlabStatus::RoutesExhausted
                    }
                }
            }
            Err(EngineError::Routing(RoutingError::NoRoute { src, dst })) => {
                set_error(format!("no admissible route from {src} to {dst}"));
                MeshlabStatus::NoRoute
            }
            Err(e) => {
                set_error(e.to_string());
                MeshlabStatus::EngineError
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn meshlab_report_free(report: *mut MeshlabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Whether the run delivered every scheduled transmission.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_completed(
    report: *const MeshlabReport,
    out: *mut bool,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        write_out(out, report.report.status == RunStatus::Completed)
    })
}

/// Tick at which the run exhausted its routes, or -1 if it completed.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_exhausted_tick(
    report: *const MeshlabReport,
    out: *mut i64,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        let tick = match report.report.status {
            RunStatus::Completed => -1,
            RunStatus::RoutesExhausted { tick } => tick as i64,
        };
        write_out(out, tick)
    })
}

/// Tick of the first route failure, or -1 if none occurred.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_first_failover_tick(
    report: *const MeshlabReport,
    out: *mut i64,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        write_out(
            out,
            report.report.first_failover_tick().map_or(-1, |t| t as i64),
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn meshlab_report_delivered_packets(
    report: *const MeshlabReport,
    out: *mut u64,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        write_out(out, report.report.delivered_packets)
    })
}

/// Number of routes activated over the run (initial plus failovers).
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_route_count(
    report: *const MeshlabReport,
    out: *mut u32,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        write_out(out, report.report.route_history.len() as u32)
    })
}

/// Dash-joined node path of the `index`-th activated route; free with
/// `meshlab_string_free`.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_route_path(
    report: *const MeshlabReport,
    index: u32,
    out: *mut *mut c_char,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        match report.report.route_history.get(index as usize) {
            Some(activation) => out_string(activation.route.dashed(), out),
            None => {
                set_error(format!(
                    "route index {index} out of range ({} activated)",
                    report.report.route_history.len()
                ));
                MeshlabStatus::OutOfRange
            }
        }
    })
}

/// Total length in meters of the `index`-th activated route.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_route_distance(
    report: *const MeshlabReport,
    index: u32,
    out: *mut f64,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        match report.report.route_history.get(index as usize) {
            Some(activation) => write_out(out, activation.route.total_distance),
            None => {
                set_error(format!(
                    "route index {index} out of range ({} activated)",
                    report.report.route_history.len()
                ));
                MeshlabStatus::OutOfRange
            }
        }
    })
}

/// Final battery voltage of one node.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_final_voltage(
    report: *const MeshlabReport,
    node: u32,
    out: *mut f64,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        match report.report.final_voltages.get(&NodeId(node)) {
            Some(v) => write_out(out, *v),
            None => {
                set_error(format!("node {node} does not exist in the layout"));
                MeshlabStatus::UnknownNode
            }
        }
    })
}

/// Final battery charge of one node as percent of the reference voltage.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_energy_percent(
    report: *const MeshlabReport,
    node: u32,
    out: *mut f64,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        match report.report.final_energy_map.get(NodeId(node)) {
            Some(pct) => write_out(out, pct),
            None => {
                set_error(format!("node {node} does not exist in the layout"));
                MeshlabStatus::UnknownNode
            }
        }
    })
}

/// Mean final voltage across battery-powered nodes.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_mean_final_voltage(
    report: *const MeshlabReport,
    out: *mut f64,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        write_out(out, report.report.mean_final_battery_voltage())
    })
}

/// The run's activated routes as CSV; free with `meshlab_string_free`.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_routes_csv(
    report: *const MeshlabReport,
    out: *mut *mut c_char,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        let routes: Vec<_> = report
            .report
            .route_history
            .iter()
            .map(|a| a.route.clone())
            .collect();
        let mut buf = Vec::new();
        write_routes_csv(&routes, &report.report.layout, &mut buf).expect("writing to memory");
        out_string(String::from_utf8(buf).expect("CSV is UTF-8"), out)
    })
}

/// The run summary as a JSON document; free with `meshlab_string_free`.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_summary_json(
    report: *const MeshlabReport,
    out: *mut *mut c_char,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        if let Err(status) = require_out(out, "out") {
            return status;
        }
        out_string(
            summary_json(&report.report, &report.label, &report.notes),
            out,
        )
    })
}

/// Write the full report directory (voltages, energy map, routes,
/// events, neighbors, summary) into `dir`, creating it if needed.
#[no_mangle]
pub unsafe extern "C" fn meshlab_report_write_directory(
    report: *const MeshlabReport,
    dir: *const c_char,
) -> MeshlabStatus {
    guarded(|| {
        let report = match ref_arg(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        let dir = match str_arg(dir, "dir") {
            Ok(d) => d,
            Err(status) => return status,
        };
        match write_run_directory(&report.report, &report.label, &report.notes, Path::new(dir)) {
            Ok(()) => {
                clear_error();
                MeshlabStatus::Ok
            }
            Err(e) => {
                set_error(format!("could not write {dir}: {e}"));
                MeshlabStatus::IoError
            }
        }
    })
}

/// Free a string returned through any `char **` out-parameter.
#[no_mangle]
pub unsafe extern "C" fn meshlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
