//! CSV and JSON artifacts. Floats use the shortest representation that
//! parses back to the same value; CSV rows end in `\n`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use smdo_core::smdo::OptimizationResult;
use smdo_core::SimulationTrace;

use crate::error::CliError;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Columns `t`, then `r_i, y_i, u_i, e_i, sat_i` for each loop `i` (1-based).
pub fn trace_csv(trace: &SimulationTrace) -> Vec<u8> {
    let mut header = vec!["t".to_string()];
    for i in 1..=trace.loops.len() {
        header.extend(["r", "y", "u", "e", "sat"].map(|c| format!("{c}_{i}")));
    }
    let rows: Vec<Vec<String>> = (0..trace.len())
        .map(|k| {
            let mut row = vec![fmt_f64(trace.time[k])];
            for l in &trace.loops {
                row.extend([
                    fmt_f64(l.reference[k]),
                    fmt_f64(l.output[k]),
                    fmt_f64(l.control[k]),
                    fmt_f64(l.error[k]),
                    u8::from(l.saturated[k]).to_string(),
                ]);
            }
            row
        })
        .collect();
    csv_bytes(&header, &rows)
}

/// One row per iteration, starting with row 0 for the initial point:
/// `iteration, cost, w_i…, kp_i, ki_i…, outcome_kp_i, outcome_ki_i…`.
/// Row 0 has empty outcome cells.
pub fn convergence_csv(result: &OptimizationResult, initial_weights: &[f64]) -> Vec<u8> {
    let loops = result.initial.len() / 2;
    let mut header = vec!["iteration".to_string(), "cost".to_string()];
    header.extend((1..=initial_weights.len()).map(|i| format!("w_{i}")));
    for i in 1..=loops {
        header.extend([format!("kp_{i}"), format!("ki_{i}")]);
    }
    for i in 1..=loops {
        header.extend([format!("outcome_kp_{i}"), format!("outcome_ki_{i}")]);
    }

    let row =
        |iteration: usize, cost: f64, weights: &[f64], params: &[f64], outcomes: Vec<String>| {
            let mut r = vec![iteration.to_string(), fmt_f64(cost)];
            r.extend(weights.iter().map(|&w| fmt_f64(w)));
            r.extend(params.iter().map(|&p| fmt_f64(p)));
            r.extend(outcomes);
            r
        };
    let mut rows = vec![row(
        0,
        result.initial_cost,
        initial_weights,
        &result.initial,
        vec![String::new(); result.initial.len()],
    )];
    for rec in &result.history {
        let outcomes = rec
            .components
            .iter()
            .map(|c| c.outcome.as_str().to_string())
            .collect();
        rows.push(row(
            rec.iteration,
            rec.cost,
            &rec.weights,
            &rec.params,
            outcomes,
        ));
    }
    csv_bytes(&header, &rows)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    text.into_bytes()
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// `None` for values JSON cannot represent.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
