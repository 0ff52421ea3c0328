use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Backend, ExperimentConfig, TaskConfig};
use crate::physical::run_continuous;
use crate::readout::{
    cross_validate, nmse, predict, quantize_symbols, ser, train_linear, train_linear_multi, wer,
    winner_takes_all, MetricKind, MetricReport, RegressionConfig, SymbolAlphabet,
};
use crate::reservoir::{generate_mask, run_discrete, InputMask, MaskSpec};
use crate::seed::{self, stream};
use crate::series::{InputSequence, StateMatrix};
use crate::tasks::{
    gen_channel, gen_narma10, gen_sine_square, memory_capacity, ChannelConfig, FeatureCorpus,
    MemoryCapacityConfig, TaskDataset, Targets,
};
use crate::{Error, Result};

/// Seed of trial `t`: `master XOR splitmix64(t)`.
pub fn trial_seed(master_seed: u64, trial: usize) -> u64 {
    seed::derive_seed(master_seed, trial as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

impl Metric {
    fn new(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value }
    }
}

/// Whether larger values of the named metric are better.
pub fn higher_is_better(metric: &str) -> bool {
    metric.starts_with(MetricKind::Capacity.name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub regenerations: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub name: String,
    pub trials: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); `0` for one trial.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricSummary {
    pub fn from_values(name: &str, values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            name: name.to_owned(),
            trials: n,
            mean,
            std,
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// The swept coordinates of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n_nodes: usize,
    pub desync_k: usize,
    pub feedback_gain: f64,
    pub input_gain: f64,
    pub bias: f64,
    pub ridge_lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
}

impl GridPoint {
    pub fn of(config: &ExperimentConfig) -> Self {
        let r = &config.reservoir;
        Self {
            n_nodes: r.n_nodes,
            desync_k: r.desync_k,
            feedback_gain: r.feedback_gain,
            input_gain: r.input_gain,
            bias: r.bias,
            ridge_lambda: config.readout.ridge_lambda,
            snr_db: config.task.as_ref().and_then(TaskConfig::snr_db),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultReport {
    pub task: String,
    pub backend: Backend,
    pub point: GridPoint,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub summary: Vec<MetricSummary>,
    pub runtime_secs: f64,
}

impl ResultReport {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.summary.iter().find(|s| s.name == name)
    }

    pub fn failed_trials(&self) -> usize {
        self.trials.iter().filter(|t| t.error.is_some()).count()
    }

    /// Per-trial values of one metric, in trial order.
    pub fn values(&self, name: &str) -> Vec<f64> {
        self.trials
            .iter()
            .flat_map(|t| t.metrics.iter().filter(|m| m.name == name).map(|m| m.value))
            .collect()
    }
}

fn summarize(trials: &[TrialResult]) -> Vec<MetricSummary> {
    let mut names: Vec<&str> = Vec::new();
    for m in trials.iter().flat_map(|t| &t.metrics) {
        if !names.contains(&m.name.as_str()) {
            names.push(&m.name);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let values: Vec<f64> = trials
                .iter()
                .flat_map(|t| t.metrics.iter().filter(|m| m.name == name).map(|m| m.value))
                .collect();
            MetricSummary::from_values(name, &values)
        })
        .collect()
}

/// Runs every trial of `config` (in parallel) and aggregates in trial order.
///
/// A failing trial is recorded with its error and left out of the summary.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultReport> {
    config.validate()?;
    let task = config.task()?;
    let started = Instant::now();
    let corpus = match task {
        TaskConfig::Features(f) => {
            let text = std::fs::read_to_string(&f.path).map_err(|e| Error::io(&f.path, e))?;
            Some(FeatureCorpus::parse(&text)?)
        }
        _ => None,
    };
    let trials: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(config.master_seed, t);
            match run_trial(config, task, corpus.as_ref(), seed) {
                Ok((metrics, regenerations)) => {
                    log::info!("{} trial {t}: {metrics:?}", task.name());
                    TrialResult { trial: t, seed, metrics, regenerations, error: None }
                }
                Err(e) => {
                    log::error!("{} trial {t} failed: {e}", task.name());
                    TrialResult { trial: t, seed, metrics: Vec::new(), regenerations: 0, error: Some(e.to_string()) }
                }
            }
        })
        .collect();
    Ok(ResultReport {
        task: task.name().to_owned(),
        backend: config.backend,
        point: GridPoint::of(config),
        config: config.clone(),
        summary: summarize(&trials),
        trials,
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}

/// A reservoir of either backend with its trial's mask and noise seed.
struct Reservoir<'a> {
    config: &'a ExperimentConfig,
    mask: InputMask,
    noise_seed: u64,
}

impl<'a> Reservoir<'a> {
    fn new(config: &'a ExperimentConfig, n_inputs: usize, seed: u64) -> Result<Self> {
        let mask = generate_mask(&MaskSpec {
            distribution: config.mask,
            n_nodes: config.reservoir.n_nodes,
            n_inputs,
            seed: seed::derive_seed(seed, stream::MASK),
        })?;
        Ok(Self {
            config,
            mask,
            noise_seed: seed::derive_seed(seed, stream::NOISE),
        })
    }

    fn run(&self, inputs: &InputSequence) -> Result<StateMatrix> {
        self.run_with_noise(inputs, self.noise_seed)
    }

    fn run_with_noise(&self, inputs: &InputSequence, noise_seed: u64) -> Result<StateMatrix> {
        match self.config.backend {
            Backend::Discrete => run_discrete(&self.config.reservoir, &self.mask, inputs, None),
            Backend::Continuous => {
                let p = self.config.physical_params(noise_seed)?;
                run_continuous(&p, &self.mask, inputs)
            }
        }
    }
}

/// Trains on the first `train` steps and predicts the rest.
fn fit_and_predict(
    states: &StateMatrix,
    y: &[f64],
    train: usize,
    readout: &RegressionConfig,
) -> Result<Vec<f64>> {
    let w = train_linear(&states.slice(0..train), &y[..train], readout)?;
    predict(&states.slice(train..states.n_steps()), &w)
}

fn scalar(d: &TaskDataset) -> &[f64] {
    d.targets.as_scalar().expect("generated task has scalar targets")
}

fn run_trial(
    config: &ExperimentConfig,
    task: &TaskConfig,
    corpus: Option<&FeatureCorpus>,
    seed: u64,
) -> Result<(Vec<Metric>, u32)> {
    let data_seed = seed::derive_seed(seed, stream::DATA);
    let readout = &config.readout;
    match task {
        TaskConfig::Narma10(t) => {
            let d = gen_narma10(t.train + t.test, data_seed)?;
            let states = Reservoir::new(config, 1, seed)?.run(&d.inputs)?;
            let yhat = fit_and_predict(&states, scalar(&d), t.train, readout)?;
            let v = nmse(&scalar(&d)[t.train..], &yhat)?;
            Ok((vec![Metric::new("nmse", v)], d.meta.regenerations))
        }
        TaskConfig::Channel(t) => {
            let d = gen_channel(&ChannelConfig {
                snr_db: t.snr_db,
                length: t.train + t.test,
                seed: data_seed,
                decision_delay: t.decision_delay,
            })?;
            let states = Reservoir::new(config, 1, seed)?.run(&d.inputs)?;
            let yhat = fit_and_predict(&states, scalar(&d), t.train, readout)?;
            let decided = quantize_symbols(&yhat, &SymbolAlphabet::pam4());
            let v = ser(&scalar(&d)[t.train..], &decided)?;
            Ok((vec![Metric::new("ser", v)], 0))
        }
        TaskConfig::SineSquare(t) => {
            let d = gen_sine_square(t.train_segments + t.test_segments, data_seed)?;
            let train = t.train_segments * crate::tasks::SEGMENT_LEN;
            let states = Reservoir::new(config, 1, seed)?.run(&d.inputs)?;
            let yhat = fit_and_predict(&states, scalar(&d), train, readout)?;
            let v = nmse(&scalar(&d)[train..], &yhat)?;
            Ok((vec![Metric::new("nmse", v)], 0))
        }
        TaskConfig::Memory(t) => {
            let reservoir = Reservoir::new(config, 1, seed)?;
            let mc = memory_capacity(
                |u| reservoir.run(u),
                &MemoryCapacityConfig {
                    max_delay: t.max_delay,
                    washout: readout.washout,
                    train_len: t.train,
                    test_len: t.test,
                    ridge_lambda: readout.ridge_lambda,
                    seed: data_seed,
                },
            )?;
            Ok((
                vec![
                    Metric::new("capacity", mc.total),
                    Metric::new("capacity_0", mc.per_delay[0]),
                ],
                0,
            ))
        }
        TaskConfig::Features(t) => {
            let corpus = corpus.expect("corpus loaded for feature tasks");
            let corpus = if t.noise_std > 0.0 {
                corpus.with_noise(t.noise_std, data_seed)
            } else {
                corpus.clone()
            };
            let v = classify_utterances(config, &corpus, t.folds, seed)?;
            Ok((vec![Metric::new("wer", v)], 0))
        }
    }
}

/// Cross-validated word error rate of the per-class readouts with
/// time-averaged winner-takes-all decisions. Each utterance drives the
/// reservoir from rest.
fn classify_utterances(config: &ExperimentConfig, corpus: &FeatureCorpus, folds: usize, seed: u64) -> Result<f64> {
    let data = corpus.to_dataset("corpus")?;
    let segments = data.segments.as_ref().expect("feature datasets are segmented");
    let Targets::PerClass(class_targets) = &data.targets else {
        unreachable!("feature datasets have class targets")
    };
    let reservoir = Reservoir::new(config, corpus.channels, seed)?;
    let states: Vec<StateMatrix> = segments
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let noise = seed::derive_seed(reservoir.noise_seed, i as u64);
            reservoir.run_with_noise(&data.inputs.slice(s.range.clone()), noise)
        })
        .collect::<Result<_>>()?;
    let regression = RegressionConfig { washout: 0, ..config.readout };
    let gather = |items: &[usize]| -> Result<(StateMatrix, Vec<Vec<f64>>)> {
        let x = StateMatrix::concat(items.iter().map(|&i| &states[i]))?;
        let y = class_targets
            .iter()
            .map(|row| items.iter().flat_map(|&i| row[segments[i].range.clone()].iter().copied()).collect())
            .collect();
        Ok((x, y))
    };
    let cv = cross_validate(segments.len(), folds, seed::derive_seed(seed, stream::FOLDS), |train, test| {
        let (x, y) = gather(train)?;
        let weights = train_linear_multi(&x, &y, &regression)?;
        let (xt, _) = gather(test)?;
        let scores = weights.iter().map(|w| predict(&xt, w)).collect::<Result<Vec<_>>>()?;
        let mut start = 0;
        let ranges: Vec<_> = test
            .iter()
            .map(|&i| {
                let r = start..start + segments[i].range.len();
                start = r.end;
                r
            })
            .collect();
        let labels = winner_takes_all(&scores, &ranges)?;
        let truth: Vec<usize> = test.iter().map(|&i| segments[i].label).collect();
        MetricReport::new(MetricKind::Wer, wer(&labels, &truth)?, test.len())
    })?;
    Ok(cv.mean.value)
}

/// Checks a CLI-style threshold: `mean <= bound` for error metrics, `mean >=
/// bound` for capacities. Returns the observed mean.
pub fn check_assertion(report: &ResultReport, metric: &str, bound: f64) -> Result<(bool, f64)> {
    let s = report
        .metric(metric)
        .ok_or_else(|| Error::Config(format!("report has no metric `{metric}`")))?;
    let ok = if higher_is_better(metric) { s.mean >= bound } else { s.mean <= bound };
    Ok((ok, s.mean))
}
