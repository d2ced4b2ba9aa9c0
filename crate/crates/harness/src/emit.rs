//! CSV and JSON output.
//!
//! Numbers use the shortest round-trip formatting, so every file is
//! lossless and byte-stable for identical inputs. Wall-clock figures only go
//! to `timings.csv` and the trace files, never to `summary.csv` or
//! `records.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use holoxl::channel::ChannelSet;
use holoxl::frontend::FeasibleSet;
use holoxl::linalg::CVector;
use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::runner::{summarize, ResultRecord, RunOutput, SummaryRow};

// Debug formatting is the shortest round-trip form and switches to
// exponent notation for very small or large magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::io(path, std::io::Error::other(e))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn mkdir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// File-name-safe form of a method label.
pub fn slug(method: &str) -> String {
    method
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

pub fn trace_file(r: &ResultRecord) -> String {
    format!("p{}_s{}_{}.csv", r.point, r.seed, slug(&r.method))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(
        path,
        &["axis", "value", "method", "mean_rate", "std_rate", "mean_rate_bps", "n_seeds", "n_failed"],
        rows.iter().map(|r| {
            [
                r.axis.clone(),
                opt(r.value),
                r.method.clone(),
                num(r.mean_rate),
                num(r.std_rate),
                num(r.mean_rate_bps),
                r.n_seeds.to_string(),
                r.n_failed.to_string(),
            ]
        }),
    )
}

pub fn write_records(path: &Path, records: &[ResultRecord]) -> Result<()> {
    write_rows(
        path,
        &[
            "config_hash",
            "axis",
            "value",
            "seed",
            "method",
            "status",
            "rate",
            "rate_bps",
            "design_rate",
            "iterations",
            "converged",
            "max_identity_gap",
            "channel_hash",
            "trace",
        ],
        records.iter().map(|r| {
            [
                r.config_hash.clone(),
                r.axis.clone(),
                opt(r.value),
                r.seed.to_string(),
                r.method.clone(),
                r.error.clone().unwrap_or_else(|| "ok".into()),
                num(r.rate),
                num(r.rate_bps),
                opt(r.design_rate),
                r.iterations.to_string(),
                r.converged.to_string(),
                opt(r.max_identity_gap),
                r.channel_hash.clone(),
                if r.trace.is_some() { format!("traces/{}", trace_file(r)) } else { String::new() },
            ]
        }),
    )
}

pub fn write_timings(path: &Path, records: &[ResultRecord]) -> Result<()> {
    write_rows(
        path,
        &["value", "seed", "method", "runtime_ms"],
        records
            .iter()
            .map(|r| [opt(r.value), r.seed.to_string(), r.method.clone(), num(r.runtime_ms)]),
    )
}

/// `iteration, rate, mse_rate, identity_gap, inner_iterations,
/// kept_warm_start, eigen_warning` plus per-stage seconds. Row 0 is the
/// initial point.
pub fn write_trace(path: &Path, r: &ResultRecord) -> Result<()> {
    let Some(trace) = &r.trace else { return Ok(()) };
    let header = [
        "iteration",
        "rate",
        "mse_rate",
        "identity_gap",
        "inner_iterations",
        "kept_warm_start",
        "eigen_warning",
        "combiner_s",
        "quadratic_s",
        "solve_s",
    ];
    let first = std::iter::once(
        [0.to_string(), num(trace.rates[0])]
            .into_iter()
            .chain(std::iter::repeat_n(String::new(), header.len() - 2))
            .collect::<Vec<_>>(),
    );
    let rest = trace.records.iter().map(|it| {
        vec![
            it.iteration.to_string(),
            num(it.rate),
            num(it.mse_rate),
            num(it.identity_gap),
            it.inner_iterations.to_string(),
            it.kept_warm_start.to_string(),
            it.eigen_warning.to_string(),
            num(it.timings.combiner),
            num(it.timings.quadratic),
            num(it.timings.solve),
        ]
    });
    write_rows(path, &header, first.chain(rest))
}

/// One `(row, col, re, im)` CSV per subcarrier plus `meta.json`.
pub fn write_channels(dir: &Path, seed: u64, set: &ChannelSet) -> Result<()> {
    mkdir(dir)?;
    for (s, g) in set.matrices.iter().enumerate() {
        let path = dir.join(format!("subcarrier_{s}.csv"));
        write_rows(
            &path,
            &["row", "col", "re", "im"],
            (0..g.nrows()).flat_map(|i| {
                (0..g.ncols()).map(move |j| [i.to_string(), j.to_string(), num(g[(i, j)].re), num(g[(i, j)].im)])
            }),
        )?;
    }
    let meta = json!({
        "seed": seed,
        "model_tag": set.model.tag(),
        "coupling_applied": set.coupling_applied,
        "rows": set.matrices.first().map_or(0, |g| g.nrows()),
        "cols": set.matrices.first().map_or(0, |g| g.ncols()),
        "grid": set.grid,
    });
    write_json(&dir.join("meta.json"), &meta)
}

/// `(index, re, im, set)` rows.
pub fn write_weights(path: &Path, set: FeasibleSet, q: &CVector) -> Result<()> {
    let tag = set.to_string();
    write_rows(
        path,
        &["index", "re", "im", "set"],
        q.iter().enumerate().map(|(i, z)| [i.to_string(), num(z.re), num(z.im), tag.clone()]),
    )
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Files written by [`emit_results`].
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub summary: PathBuf,
    pub records: PathBuf,
    pub config: PathBuf,
}

/// Writes `summary.csv`, `records.csv`, `timings.csv`, `config.json`,
/// `traces/` and, when present, `channels/` and `weights/`.
pub fn emit_results(out: &RunOutput, dir: &Path) -> Result<Emitted> {
    mkdir(dir)?;
    let rows = summarize(&out.records);
    let summary = dir.join("summary.csv");
    write_summary(&summary, &rows)?;
    let records = dir.join("records.csv");
    write_records(&records, &out.records)?;
    write_timings(&dir.join("timings.csv"), &out.records)?;
    let traces = dir.join("traces");
    mkdir(&traces)?;
    for r in out.records.iter().filter(|r| r.trace.is_some()) {
        write_trace(&traces.join(trace_file(r)), r)?;
    }
    for (seed, set) in &out.channels {
        write_channels(&dir.join("channels").join(format!("seed_{seed}")), *seed, set)?;
    }
    let with_weights: Vec<&ResultRecord> = out.records.iter().filter(|r| r.weights.is_some()).collect();
    if !with_weights.is_empty() {
        let wdir = dir.join("weights");
        mkdir(&wdir)?;
        for r in with_weights {
            let (set, q) = r.weights.as_ref().expect("filtered");
            write_weights(&wdir.join(format!("s{}_{}.csv", r.seed, slug(&r.method))), *set, q)?;
        }
    }
    let config = dir.join("config.json");
    let echo = json!({
        "config_hash": out.config_hash,
        "version": env!("CARGO_PKG_VERSION"),
        "config": out.config,
    });
    write_json(&config, &echo)?;
    Ok(Emitted { summary, records, config })
}
