//! Config-driven benchmark runs: seeded trials on either backend, parameter
//! sweeps, bifurcation scans and result files.
//!
//! Trial `t` of an experiment uses `trial_seed = master_seed XOR
//! splitmix64(t)`; the dataset, mask, loop noise and fold assignment each draw
//! from `derive_seed(trial_seed, stream)` with the indices in
//! [`crate::seed::stream`]. Trials run in parallel and are collected in trial
//! order, so results do not depend on the thread count.

mod config;
mod emit;
mod run;
mod sweep;

pub use config::{
    Backend, BifurcationConfig, ChannelTask, ExperimentConfig, FeaturesTask, MemoryTask, NarmaTask,
    SineSquareTask, SweepConfig, TaskConfig,
};
pub use emit::{
    emit_results, emit_sweep, read_results_csv, read_summary_csv, result_rows, EmittedFiles, ResultRow,
    SummaryRow, BEST_FILE, REPORT_FILE, RESULTS_FILE, SUMMARY_FILE,
};
pub use run::{
    check_assertion, higher_is_better, run_experiment, trial_seed, GridPoint, Metric, MetricSummary,
    ResultReport, TrialResult,
};
pub use sweep::{best_points, sweep, BestPoint, SweepReport};

use std::path::{Path, PathBuf};

use crate::physical::{bifurcation_scan, first_split, write_bifurcation_csv, BifurcationSlice};
use crate::seed::{self, stream};
use crate::{Error, Result};

pub const BIFURCATION_FILE: &str = "bifurcation.csv";
pub const BIFURCATION_SUMMARY_FILE: &str = "bifurcation_summary.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationReport {
    pub slices: Vec<BifurcationSlice>,
    pub min_fraction: f64,
    /// First gain with two or more levels.
    pub first_split: Option<f64>,
}

impl BifurcationReport {
    pub fn levels(&self, alpha: f64) -> Option<usize> {
        self.slice(alpha).map(|s| s.histogram.levels(self.min_fraction).len())
    }

    pub fn support_width(&self, alpha: f64) -> Option<f64> {
        self.slice(alpha).map(|s| s.histogram.support_width(self.min_fraction))
    }

    /// Slice whose gain is closest to `alpha`.
    pub fn slice(&self, alpha: f64) -> Option<&BifurcationSlice> {
        self.slices
            .iter()
            .min_by(|a, b| (a.alpha - alpha).abs().total_cmp(&(b.alpha - alpha).abs()))
    }
}

/// Runs the `[bifurcation]` scan of a config. The loop noise seed is
/// `derive_seed(master_seed, NOISE)`.
pub fn run_bifurcation(config: &ExperimentConfig) -> Result<BifurcationReport> {
    config.validate()?;
    let b = config
        .bifurcation
        .as_ref()
        .ok_or_else(|| Error::Config("config has no [bifurcation] section".into()))?;
    if config.reservoir.input_gain != 0.0 {
        return Err(Error::Config("bifurcation scans need reservoir.input_gain = 0".into()));
    }
    let params = config.physical_params(seed::derive_seed(config.master_seed, stream::NOISE))?;
    let grid = b.alpha_grid();
    log::info!("bifurcation scan over {} gains", grid.len());
    let slices = bifurcation_scan(&params, &grid, b.steps_per_alpha, b.transient_discard)?;
    Ok(BifurcationReport {
        first_split: first_split(&slices, b.min_fraction),
        min_fraction: b.min_fraction,
        slices,
    })
}

/// Writes `bifurcation.csv` (`alpha,bin_center,count`) and a per-gain
/// summary with level counts and support widths.
pub fn emit_bifurcation(report: &BifurcationReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let scan = dir.join(BIFURCATION_FILE);
    write_bifurcation_csv(&scan, &report.slices)?;
    let summary = dir.join(BIFURCATION_SUMMARY_FILE);
    let mut w = csv::Writer::from_path(&summary).map_err(|e| Error::csv_at(&summary, e))?;
    w.write_record(["alpha", "levels", "support_width"]).map_err(|e| Error::csv_at(&summary, e))?;
    for s in &report.slices {
        let h = &s.histogram;
        w.write_record([
            format!("{:?}", s.alpha),
            h.levels(report.min_fraction).len().to_string(),
            format!("{:?}", h.support_width(report.min_fraction)),
        ])
        .map_err(|e| Error::csv_at(&summary, e))?;
    }
    w.flush().map_err(|e| Error::io(&summary, e))?;
    Ok((scan, summary))
}
