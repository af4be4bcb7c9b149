//! CSV artifacts and their JSON sidecars. Every CSV has a header row, LF
//! line endings and shortest round-trip decimals.

use std::fs;
use std::path::{Path, PathBuf};

use hamn_core::dataset::Dataset;
use hamn_core::eval::{FoldMetrics, MetricsReport};
use hamn_core::numerics::Matrix;
use serde::Serialize;

use crate::checkpoint::ConfigEcho;
use crate::error::{Error, Result};
use crate::runner::LeaderboardRow;

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn seconds(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |s| format!("{s:.3}"))
}

fn metric_row(label: String, m: &FoldMetrics, secs: Option<f64>) -> Vec<String> {
    vec![
        label,
        m.auc.to_string(),
        m.aupr.to_string(),
        m.hr1.to_string(),
        m.hr5.to_string(),
        m.hr10.to_string(),
        seconds(secs),
    ]
}

/// One row per fold and a final `mean` row. `train_seconds` is `NA` for
/// folds that were not timed.
pub fn metrics_csv(report: &MetricsReport) -> Result<String> {
    let mut w = writer();
    w.write_record(["fold", "auc", "aupr", "hr1", "hr5", "hr10", "train_seconds"])?;
    for (f, secs) in report.folds.iter().zip(&report.train_seconds) {
        w.write_record(metric_row(f.fold.to_string(), f, *secs))?;
    }
    let timed: Option<Vec<f64>> = report.train_seconds.iter().copied().collect();
    let mean_secs = timed.filter(|t| !t.is_empty()).map(|t| t.iter().sum::<f64>() / t.len() as f64);
    w.write_record(metric_row("mean".into(), &report.mean(), mean_secs))?;
    finish(w)
}

/// Scored `(drug, disease)` cells sorted by score descending, then by drug
/// and disease index.
pub fn rank_cells(scores: &Matrix, cells: impl IntoIterator<Item = (usize, usize)>) -> Vec<(usize, usize, f64)> {
    let mut out: Vec<(usize, usize, f64)> = cells.into_iter().map(|(i, j)| (i, j, scores.get(i, j))).collect();
    out.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    out
}

pub fn predictions_csv(dataset: &Dataset, ranked: &[(usize, usize, f64)]) -> Result<String> {
    let mut w = writer();
    w.write_record(["drug_id", "disease_id", "score"])?;
    let drugs = dataset.assoc.drug_ids();
    let diseases = dataset.assoc.disease_ids();
    for &(i, j, s) in ranked {
        w.write_record([drugs[i].as_str(), diseases[j].as_str(), &s.to_string()])?;
    }
    finish(w)
}

pub fn loss_trace_csv(trace: &[f64]) -> Result<String> {
    let mut w = writer();
    w.write_record(["epoch", "loss"])?;
    for (e, l) in trace.iter().enumerate() {
        w.write_record([e.to_string(), l.to_string()])?;
    }
    finish(w)
}

pub fn leaderboard_csv(rows: &[LeaderboardRow]) -> Result<String> {
    let mut w = writer();
    w.write_record([
        "rank", "memory_dim", "eta", "alpha", "beta", "lambda", "delta", "val_auc", "val_aupr", "val_hr10",
    ])?;
    for (r, row) in rows.iter().enumerate() {
        let p = &row.point;
        w.write_record([
            (r + 1).to_string(),
            p.memory_dim.to_string(),
            p.eta.to_string(),
            p.alpha.to_string(),
            p.beta.to_string(),
            p.lambda.to_string(),
            p.delta.to_string(),
            row.metrics.auc.to_string(),
            row.metrics.aupr.to_string(),
            row.metrics.hr10.to_string(),
        ])?;
    }
    finish(w)
}

/// Provenance written next to an artifact as `<artifact>.json`.
#[derive(Debug, Serialize)]
pub struct RunInfo {
    pub command: String,
    pub seed: u64,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_drugs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_positives: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_negatives: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
}

impl RunInfo {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        RunInfo {
            command: command.to_string(),
            seed: config.seed,
            config,
            scenario: None,
            folds: None,
            test_drugs: None,
            test_positives: None,
            test_negatives: None,
            grid_size: None,
        }
    }
}

pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_os_string();
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_with_sidecar(path: &Path, text: &str, info: &RunInfo) -> Result<()> {
    write_text(path, text)?;
    let mut json = serde_json::to_string_pretty(info)?;
    json.push('\n');
    write_text(&sidecar_path(path), &json)
}
