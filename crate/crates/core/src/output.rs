//! Trace and summary files.
//!
//! Each (algorithm, seed) cell becomes `trace_<fingerprint>_<seed>.csv`,
//! with the run fingerprint as 16 hex digits. Floats use the shortest
//! representation that parses back to the same value; a missing value is an
//! empty field. `summary.json` echoes the config and holds constants and
//! final metrics; wall-clock timings live only under its `meta` key.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::diagnostics::ProbeRow;
use crate::runner::{ExperimentConfig, QuantileCurve, RateProbeReport, RunTrace};
use crate::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

/// Shortest round-trip decimal form.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_string()
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn trace_file_name(trace: &RunTrace) -> String {
    format!("trace_{:016x}_{}.csv", trace.fingerprint, trace.seed)
}

/// Writes the header and one record per row.
pub fn write_rows<W: Write>(rows: &[ProbeRow], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ProbeRow::COLUMNS)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.sfo.to_string(),
            format_float(r.grad_norm_sq),
            opt(r.gap),
            opt(r.l2_z),
            opt(r.l2_h),
            opt(r.est_err),
            opt(r.est_err_avg),
            format_float(r.consensus),
            opt(r.lambda_emp),
            format_float(r.y_min),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_trace(trace: &RunTrace, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(trace_file_name(trace));
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    write_rows(trace.rows(), std::io::BufWriter::new(file)).map_err(|e| csv_err(&path, e))?;
    Ok(path)
}

fn row_json(r: &ProbeRow) -> Value {
    serde_json::to_value(r).expect("rows serialize")
}

pub fn summary_json(config: &ExperimentConfig, traces: &[RunTrace]) -> Value {
    let config_echo: Value =
        serde_json::from_str(&crate::config::canonical_json(config)).expect("canonical form is JSON");
    let runs: Vec<Value> = traces
        .iter()
        .map(|t| {
            json!({
                "algorithm_index": t.algorithm_index,
                "variant": t.variant.name(),
                "seed_index": t.seed_index,
                "seed": t.seed,
                "fingerprint": format!("{:016x}", t.fingerprint),
                "trace_file": trace_file_name(t),
                "divergence": t.divergence,
                "final": t.final_row().map(row_json),
                "constants": t.report.constants,
            })
        })
        .collect();
    json!({
        "fingerprint": format!("{:016x}", config.fingerprint()),
        "config": config_echo,
        "runs": runs,
        "meta": {
            "wall_clock_secs": traces.iter().map(|t| t.meta.wall_clock_secs).collect::<Vec<_>>(),
        },
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Creates `dir` and writes every trace plus `summary.json`.
pub fn emit_experiment(config: &ExperimentConfig, traces: &[RunTrace], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut paths = traces
        .iter()
        .map(|t| emit_trace(t, dir))
        .collect::<Result<Vec<_>>>()?;
    let summary = dir.join(SUMMARY_FILE);
    write_json(&summary, &summary_json(config, traces))?;
    paths.push(summary);
    Ok(paths)
}

/// Quantile curves as `variant,algorithm_index,t,median,q25,q75,count`.
pub fn write_quantiles<W: Write>(curves: &[QuantileCurve], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variant", "algorithm_index", "t", "median", "q25", "q75", "count"])?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.variant.name().to_string(),
                c.algorithm_index.to_string(),
                p.t.to_string(),
                format_float(p.median),
                format_float(p.q25),
                format_float(p.q75),
                p.count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_quantiles(curves: &[QuantileCurve], metric: &str, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(format!("compare_{metric}.csv"));
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    write_quantiles(curves, std::io::BufWriter::new(file)).map_err(|e| csv_err(&path, e))?;
    Ok(path)
}

pub fn emit_rate_report(report: &RateProbeReport, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("rate.json");
    write_json(&path, &serde_json::to_value(report).expect("report serializes"))?;
    Ok(path)
}
