//! CSV and text renderings of run logs and comparison reports.
//!
//! Numbers are written with Rust's shortest round-trip float formatting, so
//! every value re-parses to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::{pose_error, ComparisonReport, RunMetrics, AXES};
use crate::sim::RunLog;
use crate::state::idx;

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// One row per filter tick: truth pose, estimated pose, covariance diagonal.
pub fn run_log_csv(log: &RunLog) -> String {
    let mut out = String::from("t");
    for prefix in ["truth", "est"] {
        for axis in AXES {
            let _ = write!(out, ",{prefix}_{axis}");
        }
    }
    for name in idx::NAMES {
        let _ = write!(out, ",var_{name}");
    }
    out.push('\n');
    for tick in &log.ticks {
        out.push_str(&num(tick.time));
        for v in tick.truth.pose().iter().chain(tick.estimate.pose().iter()) {
            out.push(',');
            out.push_str(&num(*v));
        }
        for v in &tick.covariance_diagonal {
            out.push(',');
            out.push_str(&num(*v));
        }
        out.push('\n');
    }
    out
}

/// Every fused measurement; `values` is `;`-separated in mask order.
pub fn measurements_csv(log: &RunLog) -> String {
    let mut out = String::from("t,sensor,accepted,mahalanobis2,values\n");
    for m in &log.measurements {
        let values: Vec<String> = m.values.iter().map(|v| num(*v)).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(m.time),
            m.sensor,
            m.accepted,
            num(m.mahalanobis2),
            values.join(";")
        );
    }
    out
}

fn metrics_header() -> String {
    let mut out = String::from("label,seed,samples");
    for axis in AXES {
        let _ = write!(out, ",mse_{axis}");
    }
    out.push('\n');
    out
}

fn metrics_row(out: &mut String, label: &str, seed: u64, m: &RunMetrics) {
    let _ = write!(out, "{},{},{}", csv_field(label), seed, m.samples);
    for v in m.as_array() {
        out.push(',');
        out.push_str(&num(v));
    }
    out.push('\n');
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn metrics_csv(log: &RunLog, m: &RunMetrics) -> String {
    let mut out = metrics_header();
    metrics_row(&mut out, &log.label, log.seed, m);
    out
}

/// Truth / estimate / error series for one pose axis (0..6).
pub fn series_csv(log: &RunLog, axis: usize) -> String {
    let mut out = String::from("t,truth,estimate,error\n");
    for tick in &log.ticks {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(tick.time),
            num(tick.truth.pose()[axis]),
            num(tick.estimate.pose()[axis]),
            num(pose_error(tick)[axis])
        );
    }
    out
}

/// Per-seed metrics for every row of a comparison.
pub fn comparison_csv(report: &ComparisonReport) -> String {
    let mut out = metrics_header();
    for row in &report.rows {
        for (seed, m) in &row.runs {
            metrics_row(&mut out, &row.label, *seed, m);
        }
    }
    out
}

/// Mean / min / max across seeds for every (row, axis) cell.
pub fn summary_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("label,axis,mean,min,max\n");
    for row in &report.rows {
        for (axis, s) in AXES.iter().zip(&row.stats) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&row.label),
                axis,
                num(s.mean),
                num(s.min),
                num(s.max)
            );
        }
    }
    out
}

/// Aligned text table of seed-mean MSE, one row per scenario.
pub fn render_table(report: &ComparisonReport, title: &str, row_header: &str, axes: usize) -> String {
    const UNITS: [&str; 6] = ["X(m)", "Y(m)", "Z(m)", "Roll(rad)", "Pitch(rad)", "Yaw(rad)"];
    let cells: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            std::iter::once(r.label.clone())
                .chain(r.mean()[..axes].iter().map(|v| format!("{v:.5e}")))
                .collect()
        })
        .collect();
    let header: Vec<String> = std::iter::once(row_header.to_string())
        .chain(UNITS[..axes].iter().map(|s| s.to_string()))
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            cells
                .iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let line = |row: &[String]| {
        let parts: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (s, w))| {
                if c == 0 {
                    format!("{s:<w$}")
                } else {
                    format!("{s:>w$}")
                }
            })
            .collect();
        format!("| {} |\n", parts.join(" | "))
    };
    let rule = format!(
        "+{}+\n",
        widths
            .iter()
            .map(|w| "-".repeat(w + 2))
            .collect::<Vec<_>>()
            .join("+")
    );

    let seeds: Vec<String> = report.seeds.iter().map(|s| s.to_string()).collect();
    let mut out = format!("{title} (mean over seeds {})\n", seeds.join(", "));
    out.push_str(&rule);
    out.push_str(&line(&header));
    out.push_str(&rule);
    for row in &cells {
        out.push_str(&line(row));
    }
    out.push_str(&rule);
    out
}

/// Makes `dir` ready for output. A non-empty existing directory is only
/// reused when `force` is set.
pub fn prepare_output_dir(dir: &Path, force: bool) -> Result<()> {
    let io = |source| Error::Io {
        path: dir.display().to_string(),
        source,
    };
    if dir.exists() {
        let non_empty = fs::read_dir(dir).map_err(io)?.next().is_some();
        if non_empty && !force {
            return Err(Error::Config(format!(
                "output directory `{}` is not empty; pass --force to overwrite",
                dir.display()
            )));
        }
    } else {
        fs::create_dir_all(dir).map_err(io)?;
    }
    Ok(())
}

/// Writes named files into `dir`, returning their paths.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    files
        .iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}
