use super::{DatasetMeta, TaskDataset, Targets};
use crate::readout::{predict, squared_correlation, train_linear, RegressionConfig};
use crate::seed;
use crate::series::{InputSequence, StateMatrix};
use crate::{Error, Result};

/// Aligns recall targets with inputs: `u(n-k)`, or `u(n-k) u(n-k')` with a
/// pair delay, dropping the first `max(k, k')` steps.
pub fn memory_targets(u: &[f64], delay: usize, pair_delay: Option<usize>) -> Result<(Vec<f64>, Vec<f64>)> {
    let span = delay.max(pair_delay.unwrap_or(0));
    if span >= u.len() {
        return Err(Error::param(format!(
            "delay {span} leaves nothing of a length-{} sequence",
            u.len()
        )));
    }
    let targets = (span..u.len())
        .map(|n| match pair_delay {
            Some(p) => u[n - delay] * u[n - p],
            None => u[n - delay],
        })
        .collect();
    Ok((u[span..].to_vec(), targets))
}

/// Recall task on `u ~ U[-1, 1]` drawn for `length` steps.
pub fn gen_memory_task(length: usize, delay: usize, pair_delay: Option<usize>, seed: u64) -> Result<TaskDataset> {
    let mut rng = seed::rng_from_seed(seed);
    let u: Vec<f64> = (0..length).map(|_| seed::uniform(&mut rng, -1.0, 1.0)).collect();
    let (inputs, targets) = memory_targets(&u, delay, pair_delay)?;
    let mut params = vec![("length", length as f64), ("delay", delay as f64)];
    if let Some(p) = pair_delay {
        params.push(("pair_delay", p as f64));
    }
    let meta = DatasetMeta::new("memory", seed, &params);
    TaskDataset::new(InputSequence::scalar(inputs)?, Targets::Scalar(targets), None, meta)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryCapacityConfig {
    pub max_delay: usize,
    /// Leading steps never used; must cover `max_delay`.
    pub washout: usize,
    pub train_len: usize,
    pub test_len: usize,
    pub ridge_lambda: f64,
    pub seed: u64,
}

impl Default for MemoryCapacityConfig {
    fn default() -> Self {
        Self {
            max_delay: 100,
            washout: 200,
            train_len: 4000,
            test_len: 4000,
            ridge_lambda: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryCapacity {
    /// `per_delay[k]` is the squared correlation between `u(n-k)` and its
    /// reconstruction on the test steps.
    pub per_delay: Vec<f64>,
    pub total: f64,
}

/// Drives `run` once with i.i.d. `U[-1, 1]` input and fits one readout per
/// delay `k = 0..=max_delay`.
pub fn memory_capacity<F>(run: F, config: &MemoryCapacityConfig) -> Result<MemoryCapacity>
where
    F: FnOnce(&InputSequence) -> Result<StateMatrix>,
{
    if config.max_delay == 0 {
        return Err(Error::param("max_delay must be at least 1"));
    }
    if config.washout < config.max_delay {
        return Err(Error::param("washout must be at least max_delay"));
    }
    if config.train_len == 0 || config.test_len == 0 {
        return Err(Error::param("train_len and test_len must be positive"));
    }
    let total = config.washout + config.train_len + config.test_len;
    let mut rng = seed::rng_from_seed(config.seed);
    let u: Vec<f64> = (0..total).map(|_| seed::uniform(&mut rng, -1.0, 1.0)).collect();
    let states = run(&InputSequence::scalar(u.clone())?)?;
    if states.n_steps() != total {
        return Err(Error::param(format!("reservoir returned {} steps for {total} inputs", states.n_steps())));
    }
    let train_end = config.washout + config.train_len;
    let train = states.slice(config.washout..train_end);
    let test = states.slice(train_end..total);
    let reg = RegressionConfig {
        ridge_lambda: config.ridge_lambda,
        washout: 0,
        intercept: true,
    };
    let per_delay = (0..=config.max_delay)
        .map(|k| {
            let target = |range: std::ops::Range<usize>| range.map(|n| u[n - k]).collect::<Vec<_>>();
            let w = train_linear(&train, &target(config.washout..train_end), &reg)?;
            squared_correlation(&target(train_end..total), &predict(&test, &w)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MemoryCapacity {
        total: per_delay.iter().sum(),
        per_delay,
    })
}
