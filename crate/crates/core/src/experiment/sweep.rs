use rayon::prelude::*;

use super::config::{ExperimentConfig, SweepConfig, TaskConfig};
use super::run::{higher_is_better, run_experiment, GridPoint, ResultReport};
use crate::{Error, Result};

/// Expands the cartesian product of the sweep lists, varying the last listed
/// parameter (`ridge_lambda`) fastest.
pub(crate) fn grid(base: &ExperimentConfig, sweep: &SweepConfig) -> Vec<ExperimentConfig> {
    fn axis<T: Copy>(values: &[T], current: T) -> Vec<T> {
        if values.is_empty() {
            vec![current]
        } else {
            values.to_vec()
        }
    }
    let r = &base.reservoir;
    let snr = base.task.as_ref().and_then(TaskConfig::snr_db).unwrap_or(f64::NAN);
    let mut out = Vec::new();
    for &n in &axis(&sweep.n_nodes, r.n_nodes) {
        for &k in &axis(&sweep.desync_k, r.desync_k) {
            for &a in &axis(&sweep.feedback_gain, r.feedback_gain) {
                for &b in &axis(&sweep.input_gain, r.input_gain) {
                    for &phi in &axis(&sweep.bias, r.bias) {
                        for &s in &axis(&sweep.snr_db, snr) {
                            for &l in &axis(&sweep.ridge_lambda, base.readout.ridge_lambda) {
                                let mut c = base.clone();
                                c.sweep = None;
                                c.reservoir.n_nodes = n;
                                c.reservoir.desync_k = k;
                                c.reservoir.feedback_gain = a;
                                c.reservoir.input_gain = b;
                                c.reservoir.bias = phi;
                                c.readout.ridge_lambda = l;
                                if let Some(TaskConfig::Channel(ch)) = &mut c.task {
                                    ch.snr_db = s;
                                }
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Grid point with the best mean of one metric.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BestPoint {
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub point: GridPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// One report per grid point, in grid order.
    pub points: Vec<ResultReport>,
    /// Grid points whose experiment could not start, with the reason.
    pub failures: Vec<(GridPoint, String)>,
    pub best: Vec<BestPoint>,
}

/// Runs one experiment per grid point of `config.sweep` (a config without a
/// sweep section is a one-point grid).
pub fn sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    config.validate()?;
    config.task()?;
    if let Some(s) = &config.sweep {
        if !s.snr_db.is_empty() && !matches!(config.task, Some(TaskConfig::Channel(_))) {
            return Err(Error::Config("snr_db can only be swept for the channel task".into()));
        }
    }
    let configs = match &config.sweep {
        Some(s) => grid(config, s),
        None => vec![config.clone()],
    };
    log::info!("sweeping {} grid points", configs.len());
    let results: Vec<std::result::Result<ResultReport, (GridPoint, String)>> = configs
        .par_iter()
        .map(|c| run_experiment(c).map_err(|e| (GridPoint::of(c), e.to_string())))
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(f) => {
                log::error!("grid point {:?} failed: {}", f.0, f.1);
                failures.push(f);
            }
        }
    }
    let best = best_points(&points);
    Ok(SweepReport { points, failures, best })
}

/// For every metric, the first grid point attaining the best mean.
pub fn best_points(points: &[ResultReport]) -> Vec<BestPoint> {
    let mut names: Vec<&str> = Vec::new();
    for s in points.iter().flat_map(|p| &p.summary) {
        if !names.contains(&s.name.as_str()) {
            names.push(&s.name);
        }
    }
    names
        .into_iter()
        .filter_map(|name| {
            let better = |a: f64, b: f64| if higher_is_better(name) { a > b } else { a < b };
            let mut best: Option<BestPoint> = None;
            for p in points {
                if let Some(s) = p.metric(name) {
                    if best.as_ref().is_none_or(|b| better(s.mean, b.mean)) {
                        best = Some(BestPoint {
                            metric: name.to_owned(),
                            mean: s.mean,
                            std: s.std,
                            point: p.point,
                        });
                    }
                }
            }
            best
        })
        .collect()
}
