//! Linear readout `ŷ(n) = Σ_i W_i x_i(n) (+ b)` trained by (ridge) regression,
//! plus the error metrics and classification post-processing the benchmarks
//! report.

mod cv;
mod metrics;

pub use cv::{cross_validate, fold_assignment, CrossValidation};
pub use metrics::{
    mse, nmse, quantize_symbols, ser, squared_correlation, wer, winner_takes_all, MetricKind,
    MetricReport, SymbolAlphabet,
};

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::series::StateMatrix;
use crate::{Error, Result};

/// Relative pivot size below which the correlation matrix counts as singular.
const SINGULAR_PIVOT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionConfig {
    /// Ridge penalty `λ` added to the diagonal of the state correlation matrix.
    pub ridge_lambda: f64,
    /// Leading columns excluded from training.
    pub washout: usize,
    /// Fit a constant offset (never penalized).
    pub intercept: bool,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self {
            ridge_lambda: 0.0,
            washout: 50,
            intercept: true,
        }
    }
}

impl RegressionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ridge_lambda >= 0.0) || !self.ridge_lambda.is_finite() {
            return Err(Error::param(format!(
                "ridge_lambda must be finite and non-negative, got {}",
                self.ridge_lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights {
    weights: Vec<f64>,
    include_intercept: bool,
    intercept: f64,
}

impl ReadoutWeights {
    pub fn new(weights: Vec<f64>, include_intercept: bool, intercept: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("readout needs at least one weight"));
        }
        if weights.iter().chain([&intercept]).any(|w| !w.is_finite()) {
            return Err(Error::param("readout weights must be finite"));
        }
        if !include_intercept && intercept != 0.0 {
            return Err(Error::param("intercept given for a readout without intercept"));
        }
        Ok(Self {
            weights,
            include_intercept,
            intercept,
        })
    }

    /// All-zero readout for `n` nodes.
    pub fn zeros(n: usize, include_intercept: bool) -> Self {
        Self {
            weights: vec![0.0; n],
            include_intercept,
            intercept: 0.0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn include_intercept(&self) -> bool {
        self.include_intercept
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn n_nodes(&self) -> usize {
        self.weights.len()
    }

    /// Euclidean norm of the node weights (the intercept excluded).
    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Plain `key = value` text, one node per line. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "nodes = {}", self.weights.len()).unwrap();
        writeln!(s, "include_intercept = {}", self.include_intercept).unwrap();
        writeln!(s, "intercept = {:?}", self.intercept).unwrap();
        for (i, w) in self.weights.iter().enumerate() {
            writeln!(s, "w{i} = {w:?}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut nodes = None;
        let mut include = None;
        let mut intercept = None;
        let mut weights: Vec<Option<f64>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::Format { line: idx + 1, message };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let real = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("`{v}` is not a number")));
            match key {
                "nodes" => {
                    let n: usize = value.parse().map_err(|_| bad(format!("bad node count `{value}`")))?;
                    weights.resize(n, None);
                    nodes = Some(n);
                }
                "include_intercept" => {
                    include = Some(value.parse::<bool>().map_err(|_| bad(format!("`{value}` is not a bool")))?)
                }
                "intercept" => intercept = Some(real(value)?),
                _ => {
                    let i: usize = key
                        .strip_prefix('w')
                        .and_then(|i| i.parse().ok())
                        .ok_or_else(|| bad(format!("unknown key `{key}`")))?;
                    let n = nodes.ok_or_else(|| bad("`nodes` must precede the weights".into()))?;
                    if i >= n {
                        return Err(bad(format!("weight index {i} out of range for {n} nodes")));
                    }
                    weights[i] = Some(real(value)?);
                }
            }
        }
        let missing = |what: &str| Error::Format { line: 0, message: format!("missing {what}") };
        let n = nodes.ok_or_else(|| missing("`nodes`"))?;
        let weights = weights
            .into_iter()
            .enumerate()
            .map(|(i, w)| w.ok_or_else(|| missing(&format!("weight w{i}"))))
            .collect::<Result<Vec<_>>>()?;
        debug_assert_eq!(weights.len(), n);
        Self::new(
            weights,
            include.ok_or_else(|| missing("`include_intercept`"))?,
            intercept.unwrap_or(0.0),
        )
    }
}

/// Fits one readout: `W = (R + λI)⁻¹ P` over the post-washout columns.
pub fn train_linear(states: &StateMatrix, targets: &[f64], config: &RegressionConfig) -> Result<ReadoutWeights> {
    let mut w = train_linear_multi(states, &[targets], config)?;
    Ok(w.pop().expect("one target"))
}

/// Fits one readout per target sequence, sharing the factorization of `R`.
pub fn train_linear_multi<T: AsRef<[f64]>>(
    states: &StateMatrix,
    targets: &[T],
    config: &RegressionConfig,
) -> Result<Vec<ReadoutWeights>> {
    config.validate()?;
    let len = states.n_steps();
    if let Some(t) = targets.iter().find(|t| t.as_ref().len() != len) {
        return Err(Error::param(format!(
            "{} targets for {len} state columns",
            t.as_ref().len()
        )));
    }
    if config.washout >= len {
        return Err(Error::param(format!(
            "washout {} leaves no training columns out of {len}",
            config.washout
        )));
    }
    let n = states.n_nodes();
    let p = n + usize::from(config.intercept);
    let cols = len - config.washout;
    let scale = 1.0 / cols as f64;

    let mut x = DMatrix::<f64>::zeros(p, cols);
    for (c, col) in states.columns().skip(config.washout).enumerate() {
        x.view_mut((0, c), (n, 1)).copy_from_slice(col);
        if config.intercept {
            x[(n, c)] = 1.0;
        }
    }
    let mut r = (&x * x.transpose()) * scale;
    for i in 0..n {
        r[(i, i)] += config.ridge_lambda;
    }
    let diag_max = (0..p).map(|i| r[(i, i)]).fold(0.0, f64::max);
    let chol = r.clone().cholesky().filter(|c| {
        let l = c.l_dirty();
        (0..p).all(|i| l[(i, i)] * l[(i, i)] > SINGULAR_PIVOT * diag_max)
    });
    let Some(chol) = chol else {
        let hint = if config.ridge_lambda == 0.0 {
            "; set a positive ridge_lambda"
        } else {
            "; increase ridge_lambda"
        };
        return Err(Error::Numerical(format!(
            "state correlation matrix ({p}x{p}) is singular{hint}"
        )));
    };

    targets
        .iter()
        .map(|t| {
            let y = DVector::from_row_slice(&t.as_ref()[config.washout..]);
            let rhs = (&x * y) * scale;
            let sol = chol.solve(&rhs);
            let (weights, intercept) = if config.intercept {
                (sol.as_slice()[..n].to_vec(), sol[n])
            } else {
                (sol.as_slice().to_vec(), 0.0)
            };
            ReadoutWeights::new(weights, config.intercept, intercept)
                .map_err(|_| Error::Numerical("regression produced non-finite weights".into()))
        })
        .collect()
}

/// `ŷ(n) = Σ_i W_i x_i(n) + b` for every column.
pub fn predict(states: &StateMatrix, w: &ReadoutWeights) -> Result<Vec<f64>> {
    if states.n_nodes() != w.n_nodes() {
        return Err(Error::param(format!(
            "readout has {} weights, states have {} nodes",
            w.n_nodes(),
            states.n_nodes()
        )));
    }
    Ok(states
        .columns()
        .map(|col| col.iter().zip(&w.weights).map(|(x, w)| x * w).sum::<f64>() + w.intercept)
        .collect())
}
