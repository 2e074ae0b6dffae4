//! Dataset ingestion, run manifests, and report output.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::ReportRow;

/// Where the data comes from and how to read it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub column: String,
    pub max_rows: Option<usize>,
    pub drop_missing: bool,
    pub quarters: bool,
    /// Decimal places used by the DPP to merge repeated values.
    pub precision: u32,
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub dataset: DatasetSpec,
    pub methods: Vec<String>,
    pub modes: Vec<String>,
    pub burnin_frac: f64,
    pub k_intervals: usize,
    pub depth: usize,
    pub width: usize,
    pub rho: f64,
    pub delta2: f64,
    pub kmeans_k: usize,
    pub dpp_mass: f64,
    pub hyper_refit: bool,
    pub center_order: String,
    pub seed: u64,
    pub output: PathBuf,
}

/// Read one numeric column in file order. Rows whose cell is empty or
/// non-numeric are dropped when `drop_missing`, and are errors otherwise.
/// The result is truncated to `max_rows`.
pub fn load_column(spec: &DatasetSpec) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(&spec.path)
        .map_err(|e| Error::Ingestion(format!("{}: {e}", spec.path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header: {e}")))?;
    let col = headers
        .iter()
        .position(|h| h == spec.column)
        .ok_or_else(|| {
            Error::Schema(format!(
                "column '{}' not found; header has: {}",
                spec.column,
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })?;

    let cap = spec.max_rows.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        if out.len() >= cap {
            break;
        }
        let record = record.map_err(|e| Error::Ingestion(format!("row {}: {e}", i + 2)))?;
        let cell = record.get(col).unwrap_or("").trim();
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ if spec.drop_missing => continue,
            _ => {
                return Err(Error::Ingestion(format!(
                    "row {}: unusable value '{cell}' in column '{}'",
                    i + 2,
                    spec.column
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Ingestion("no usable rows".into()));
    }
    Ok(out)
}

/// Write the report CSV with the fixed schema
/// `dataset,segment,method,mode,n_total,n_scored,cpe_mean,cpe_sum,seed,config_hash`.
pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))?;
    w.write_record([
        "dataset",
        "segment",
        "method",
        "mode",
        "n_total",
        "n_scored",
        "cpe_mean",
        "cpe_sum",
        "seed",
        "config_hash",
    ])
    .map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.dataset.as_str(),
            r.segment.as_str(),
            r.method.as_str(),
            r.mode.as_str(),
            &r.n_total.to_string(),
            &r.n_scored.to_string(),
            &format_float(r.cpe_mean),
            &format_float(r.cpe_sum),
            &r.seed.to_string(),
            &r.config_hash,
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn io_err(e: csv::Error) -> Error {
    Error::Ingestion(e.to_string())
}

/// Shortest round-trip decimal; deterministic for identical inputs.
fn format_float(v: f64) -> String {
    format!("{v}")
}

/// Human-readable table with the smallest `cpe_mean` per
/// (dataset, segment, mode) group marked `**` and the runner-up `*`.
pub fn render_table(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:<8} {:<14} {:<12} {:>8} {:>14} {:>14}  {}\n",
        "dataset", "segment", "mode", "method", "n_scored", "cpe_mean", "cpe_sum", "rank"
    ));
    // rank within each (dataset, segment, mode) group
    let mut marks = vec![""; rows.len()];
    let mut seen: Vec<(String, String, &str)> = Vec::new();
    for i in 0..rows.len() {
        let key = (rows[i].dataset.clone(), rows[i].segment.clone(), rows[i].mode.as_str());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key.clone());
        let mut group: Vec<usize> = (0..rows.len())
            .filter(|&j| {
                rows[j].dataset == key.0 && rows[j].segment == key.1 && rows[j].mode.as_str() == key.2
            })
            .collect();
        group.sort_by(|&a, &b| rows[a].cpe_mean.partial_cmp(&rows[b].cpe_mean).unwrap());
        if let Some(&best) = group.first() {
            marks[best] = "**";
        }
        if let Some(&second) = group.get(1) {
            marks[second] = "*";
        }
    }
    for (r, mark) in rows.iter().zip(&marks) {
        out.push_str(&format!(
            "{:<12} {:<8} {:<14} {:<12} {:>8} {:>14.6} {:>14.4}  {}\n",
            r.dataset,
            r.segment,
            r.mode.as_str(),
            r.method.as_str(),
            r.n_scored,
            r.cpe_mean,
            r.cpe_sum,
            mark
        ));
    }
    out
}

/// Per-step error dump for external plotting: `step,method,mode,prediction,
/// actual,abs_error` per line.
pub fn write_error_dump(
    path: &Path,
    entries: &[(usize, &'static str, &'static str, f64, f64)],
) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "step,method,mode,prediction,actual,abs_error")?;
    for &(step, method, mode, pred, actual) in entries {
        writeln!(
            f,
            "{step},{method},{mode},{},{},{}",
            format_float(pred),
            format_float(actual),
            format_float((actual - pred).abs())
        )?;
    }
    Ok(())
}
