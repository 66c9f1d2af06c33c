//! Trace CSV parsing for the report command.

use std::collections::BTreeMap;
use std::path::Path;

use tsnsim::profiler::LatencyFigure;
use tsnsim::time::TimeNs;
use tsnsim::trace::TRACE_CSV_HEADER;

use crate::config::read_to_string;
use crate::error::CliError;

pub struct TraceRow {
    pub stream_id: u32,
    pub figures: BTreeMap<LatencyFigure, TimeNs>,
}

/// Parse a canonical trace CSV into per-row latency figures.
pub fn parse_trace_csv(path: &Path) -> Result<Vec<TraceRow>, CliError> {
    let text = read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{}: empty trace file", path.display())))?;
    if header != TRACE_CSV_HEADER {
        return Err(CliError::config(format!(
            "{}: unexpected trace header {header:?}",
            path.display()
        )));
    }

    let bad = |line_no: usize, what: &str| {
        CliError::config(format!("{} line {line_no}: {what}", path.display()))
    };
    let figure_columns = [
        (7, LatencyFigure::SendL),
        (8, LatencyFigure::Br1L),
        (9, LatencyFigure::Br2L),
        (10, LatencyFigure::ArrL),
        (11, LatencyFigure::E2e),
        (12, LatencyFigure::E2eNic),
    ];

    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 13 {
            return Err(bad(i + 2, "expected 13 columns"));
        }
        let stream_id = cells[0].parse().map_err(|_| bad(i + 2, "bad stream id"))?;
        let mut figures = BTreeMap::new();
        for (col, figure) in figure_columns {
            if cells[col].is_empty() {
                continue;
            }
            let ns: i64 = cells[col]
                .parse()
                .map_err(|_| bad(i + 2, "bad latency value"))?;
            figures.insert(figure, TimeNs::from_ns(ns));
        }
        rows.push(TraceRow { stream_id, figures });
    }
    if rows.is_empty() {
        return Err(CliError::config(format!(
            "{}: empty trace file",
            path.display()
        )));
    }
    Ok(rows)
}
