use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{MetricSummary, ResultReport, TrialResult};
use super::sweep::{BestPoint, SweepReport};
use crate::{Error, Result};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.toml";
pub const BEST_FILE: &str = "best.csv";

/// One `(grid point, trial, metric)` row of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub task: String,
    pub backend: String,
    #[serde(rename = "N")]
    pub n_nodes: usize,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub seed: u64,
    pub metric_name: String,
    pub metric_value: f64,
    pub trial: usize,
    pub phi: f64,
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub task: String,
    pub backend: String,
    #[serde(rename = "N")]
    pub n_nodes: usize,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
    pub lambda: f64,
    pub snr_db: Option<f64>,
    pub metric_name: String,
    pub trials: usize,
    pub failed: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    generator: String,
    runtime_secs: f64,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    best: &'a [BestPoint],
    points: Vec<PointEntry<'a>>,
}

#[derive(Serialize)]
struct PointEntry<'a> {
    task: &'a str,
    backend: &'a str,
    runtime_secs: f64,
    summary: &'a [MetricSummary],
    trials: &'a [TrialResult],
    config: &'a ExperimentConfig,
}

/// Paths written by [`emit_results`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFiles {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub report: PathBuf,
}

pub fn result_rows(report: &ResultReport) -> Vec<ResultRow> {
    let p = &report.point;
    report
        .trials
        .iter()
        .flat_map(|t| {
            t.metrics.iter().map(move |m| ResultRow {
                task: report.task.clone(),
                backend: report.backend.name().to_owned(),
                n_nodes: p.n_nodes,
                k: p.desync_k,
                alpha: p.feedback_gain,
                beta: p.input_gain,
                lambda: p.ridge_lambda,
                seed: t.seed,
                metric_name: m.name.clone(),
                metric_value: m.value,
                trial: t.trial,
                phi: p.bias,
                snr_db: p.snr_db,
            })
        })
        .collect()
}

fn summary_rows(report: &ResultReport) -> Vec<SummaryRow> {
    let p = &report.point;
    report
        .summary
        .iter()
        .map(|s| SummaryRow {
            task: report.task.clone(),
            backend: report.backend.name().to_owned(),
            n_nodes: p.n_nodes,
            k: p.desync_k,
            alpha: p.feedback_gain,
            beta: p.input_gain,
            phi: p.bias,
            lambda: p.ridge_lambda,
            snr_db: p.snr_db,
            metric_name: s.name.clone(),
            trials: s.trials,
            failed: report.failed_trials(),
            mean: s.mean,
            std: s.std,
            min: s.min,
            max: s.max,
        })
        .collect()
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv_at(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv_at(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}


/// Writes `results.csv` (one row per trial and metric), `summary.csv` (mean
/// and sample σ per grid point and metric) and `report.toml` (everything,
/// including the config of every point) into `dir`.
pub fn emit_results(reports: &[ResultReport], dir: &Path) -> Result<EmittedFiles> {
    emit(reports, &[], dir)
}

/// [`emit_results`] for a sweep, plus `best.csv` with the best point per
/// metric.
pub fn emit_sweep(sweep: &SweepReport, dir: &Path) -> Result<EmittedFiles> {
    let files = emit(&sweep.points, &sweep.best, dir)?;
    #[derive(Serialize)]
    struct BestRow<'a> {
        metric_name: &'a str,
        mean: f64,
        std: f64,
        #[serde(rename = "N")]
        n_nodes: usize,
        k: usize,
        alpha: f64,
        beta: f64,
        phi: f64,
        lambda: f64,
        snr_db: Option<f64>,
    }
    write_csv(
        &dir.join(BEST_FILE),
        sweep.best.iter().map(|b| BestRow {
            metric_name: &b.metric,
            mean: b.mean,
            std: b.std,
            n_nodes: b.point.n_nodes,
            k: b.point.desync_k,
            alpha: b.point.feedback_gain,
            beta: b.point.input_gain,
            phi: b.point.bias,
            lambda: b.point.ridge_lambda,
            snr_db: b.point.snr_db,
        }),
    )?;
    Ok(files)
}

fn emit(reports: &[ResultReport], best: &[BestPoint], dir: &Path) -> Result<EmittedFiles> {
    create_dir(dir)?;
    let files = EmittedFiles {
        results: dir.join(RESULTS_FILE),
        summary: dir.join(SUMMARY_FILE),
        report: dir.join(REPORT_FILE),
    };
    write_csv(&files.results, reports.iter().flat_map(result_rows))?;
    write_csv(&files.summary, reports.iter().flat_map(summary_rows))?;
    let doc = ReportFile {
        generator: format!("delay-rc {}", env!("CARGO_PKG_VERSION")),
        runtime_secs: reports.iter().map(|r| r.runtime_secs).sum(),
        best,
        points: reports
            .iter()
            .map(|r| PointEntry {
                task: &r.task,
                backend: r.backend.name(),
                runtime_secs: r.runtime_secs,
                summary: &r.summary,
                trials: &r.trials,
                config: &r.config,
            })
            .collect(),
    };
    let text = toml::to_string(&doc).map_err(|e| Error::Numerical(format!("report serialization: {e}")))?;
    std::fs::write(&files.report, text).map_err(|e| Error::io(&files.report, e))?;
    Ok(files)
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv_at(path, e))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(|e| Error::csv_at(path, e))
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv_at(path, e))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(|e| Error::csv_at(path, e))
}
