//! Files and console text produced by the commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde_json::json;
use ucsearch::SearchReport;

/// Writes `{stem}-report.json` and the `{stem}-timing.json` sidecar under
/// `dir`. The report is deterministic; all wall-clock data goes to the sidecar.
pub fn write_report(
    dir: &Path,
    stem: &str,
    report: &SearchReport,
    wall: Duration,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{stem}-report.json"));
    fs::write(&path, report.to_json() + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    let mut timing = report.timing.to_json();
    timing["wall_time_s"] = json!((wall.as_secs_f64() * 1e6).round() / 1e6);
    let sidecar = dir.join(format!("{stem}-timing.json"));
    let text = serde_json::to_string_pretty(&timing)? + "\n";
    fs::write(&sidecar, text).with_context(|| format!("writing {}", sidecar.display()))?;
    Ok(path)
}

pub fn summary_line(report: &SearchReport, path: &Path) -> String {
    let best = report
        .best_score()
        .map_or_else(|| "none".to_string(), |s| format!("{s:.2}"));
    format!(
        "{}: best score {best} | mean sampling time {:.6} s | mean evaluation time {:.6} s | report {}",
        report.approach,
        report.timing.mean_sampling_secs(),
        report.timing.mean_evaluation_secs(),
        path.display()
    )
}

/// One line of the comparison table.
pub struct Row {
    pub approach: String,
    pub sampling_secs: Option<f64>,
    pub evaluation_secs: f64,
    pub operating_cost: Option<f64>,
}

const HEADERS: [&str; 4] = [
    "Approach",
    "Sampling Time (s)",
    "Evaluation Time (s)",
    "Operating Cost ($)",
];

pub fn render_table(rows: &[Row]) -> String {
    let cells: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.approach.clone(),
                r.sampling_secs
                    .map_or_else(|| "-".into(), |s| format!("{s:.3}")),
                format!("{:.3}", r.evaluation_secs),
                r.operating_cost
                    .map_or_else(|| "-".into(), |c| format!("{c:.2}")),
            ]
        })
        .collect();
    let width: Vec<usize> = (0..4)
        .map(|k| {
            cells
                .iter()
                .map(|c| c[k].len())
                .chain([HEADERS[k].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, cols: [&str; 4]| {
        let _ = writeln!(
            out,
            "{:<w0$} | {:>w1$} | {:>w2$} | {:>w3$}",
            cols[0],
            cols[1],
            cols[2],
            cols[3],
            w0 = width[0],
            w1 = width[1],
            w2 = width[2],
            w3 = width[3]
        );
    };
    line(&mut out, HEADERS);
    let _ = writeln!(
        out,
        "{}",
        width
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("-+-")
    );
    for c in &cells {
        line(&mut out, [&c[0], &c[1], &c[2], &c[3]]);
    }
    out
}

/// Published figures for the 10-unit benchmark. Shown for context only: the
/// underlying data table and language model are unavailable.
pub const REFERENCE_FOOTER: &str =
    "Published reference (not reproducible here; different data and model): \
GA 240 / 14.5 / 5236, FunSearch 6.6 / 3.9 / 4884";

/// Writes the best schedule of `report` as three CSV files under `dir`:
/// the 0/1 commitment grid and the dispatch grid (one row per unit, one
/// column per period), and a per-period table of demand and total generation.
pub fn write_heatmap(report: &SearchReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let best = report
        .best
        .as_ref()
        .context("report has no schedule (no candidate produced a score)")?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let grid = dir.join(format!("{stem}-commitment.csv"));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&grid)?;
    for row in best.commitment.to_rows() {
        w.write_record(row.iter().map(u8::to_string))?;
    }
    w.flush()?;

    let power = dir.join(format!("{stem}-dispatch.csv"));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&power)?;
    for row in best.dispatch.rows() {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;

    let periods = dir.join(format!("{stem}-periods.csv"));
    let mut w = csv::Writer::from_path(&periods)?;
    w.write_record(["period", "demand", "total_generation"])?;
    for (t, (d, g)) in best.demand.iter().zip(&best.total_generation).enumerate() {
        w.write_record([t.to_string(), d.to_string(), g.to_string()])?;
    }
    w.flush()?;
    Ok(vec![grid, power, periods])
}
