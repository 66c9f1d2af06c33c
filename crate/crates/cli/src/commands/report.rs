//! `tsnsim report`: per-figure summary statistics and box plots from trace
//! CSVs, grouped by stream or by timestamping method.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use tsnsim::profiler::{summarize, summary_csv, LatencyFigure, StatSummary};
use tsnsim::time::TimeNs;
use tsnsim::trace::RunMeta;

use crate::config::{self, read_to_string, resolve_out_dir};
use crate::csvio::parse_trace_csv;
use crate::error::{CliError, CliResult};
use crate::svg::{box_plot, BoxSeries};

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GroupBy {
    Stream,
    Method,
}

#[derive(clap::Args)]
pub struct Args {
    /// Trace CSV file(s); repeat the flag to merge several runs.
    #[arg(long = "traces", required = true)]
    traces: Vec<PathBuf>,
    /// Group boxes by stream id or by the bridge timestamping method of
    /// each input file (read from its sibling .meta.json).
    #[arg(long, value_enum, default_value = "stream")]
    group_by: GroupBy,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn meta_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("trace.csv")
        .trim_end_matches(".csv")
        .to_string();
    csv.with_file_name(format!("{stem}.meta.json"))
}

fn method_label(csv: &Path) -> Result<String, CliError> {
    let path = meta_path(csv);
    let text = read_to_string(&path).map_err(|_| {
        CliError::config(format!(
            "--group-by method needs {} next to {}",
            path.display(),
            csv.display()
        ))
    })?;
    let meta: RunMeta = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid metadata {}: {e}", path.display())))?;
    Ok(meta.probes.t2.method.to_string())
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn run(args: &Args) -> CliResult {
    // group label -> figure -> series
    let mut groups: BTreeMap<String, BTreeMap<LatencyFigure, Vec<TimeNs>>> = BTreeMap::new();
    for path in &args.traces {
        let rows = parse_trace_csv(path)?;
        let file_label = match args.group_by {
            GroupBy::Method => Some(method_label(path)?),
            GroupBy::Stream => None,
        };
        for row in rows {
            let label = match &file_label {
                Some(l) => l.clone(),
                None => format!("stream {}", row.stream_id),
            };
            let by_figure = groups.entry(label).or_default();
            for (figure, value) in row.figures {
                by_figure.entry(figure).or_default().push(value);
            }
        }
    }

    let out = resolve_out_dir(args.out.as_deref())?;

    for (label, by_figure) in &groups {
        let mut summaries: BTreeMap<LatencyFigure, StatSummary> = BTreeMap::new();
        for (figure, values) in by_figure {
            summaries.insert(*figure, summarize(values).expect("non-empty series"));
        }
        config::write_file(
            &out,
            &format!("report_summary_{}.csv", sanitize(label)),
            &summary_csv(&summaries),
        )?;
    }

    for figure in LatencyFigure::ALL {
        let series: Vec<BoxSeries> = groups
            .iter()
            .map(|(label, by_figure)| BoxSeries {
                label: label.clone(),
                values: by_figure.get(&figure).cloned().unwrap_or_default(),
            })
            .collect();
        let svg = box_plot(figure.as_str(), &series);
        config::write_file(&out, &format!("box_{figure}.svg"), &svg)?;
    }

    println!(
        "report: {} group(s), 6 box plots -> {}",
        groups.len(),
        out.display()
    );
    Ok(())
}
