use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Mse,
    Nmse,
    /// Symbol error rate.
    Ser,
    /// Word (utterance) error rate.
    Wer,
    /// Summed memory capacity.
    Capacity,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Mse => "mse",
            MetricKind::Nmse => "nmse",
            MetricKind::Ser => "ser",
            MetricKind::Wer => "wer",
            MetricKind::Capacity => "capacity",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Self::Mse, Self::Nmse, Self::Ser, Self::Wer, Self::Capacity]
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }

    /// Whether smaller values are better.
    pub fn lower_is_better(self) -> bool {
        !matches!(self, MetricKind::Capacity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub kind: MetricKind,
    pub value: f64,
    pub sample_count: usize,
}

impl MetricReport {
    pub fn new(kind: MetricKind, value: f64, sample_count: usize) -> Result<Self> {
        let ok = match kind {
            MetricKind::Ser | MetricKind::Wer => (0.0..=1.0).contains(&value),
            MetricKind::Mse | MetricKind::Nmse | MetricKind::Capacity => value >= 0.0 && value.is_finite(),
        };
        if !ok {
            return Err(Error::Numerical(format!("{} value {value} out of range", kind.name())));
        }
        Ok(Self { kind, value, sample_count })
    }
}

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::param(format!("{} targets vs {} predictions", y.len(), yhat.len())));
    }
    if y.is_empty() {
        return Err(Error::param("metrics need at least one sample"));
    }
    Ok(())
}

pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64)
}

/// Mean squared error over the mean square of the target (not its variance).
pub fn nmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let power: f64 = y.iter().map(|v| v * v).sum();
    if power == 0.0 {
        return Err(Error::UndefinedMetric("NMSE of an all-zero target".into()));
    }
    let err: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(err / power)
}

/// Squared Pearson correlation; zero when either side is constant.
pub fn squared_correlation(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mh = yhat.iter().sum::<f64>() / n;
    let (mut cov, mut vy, mut vh) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(yhat) {
        cov += (a - my) * (b - mh);
        vy += (a - my) * (a - my);
        vh += (b - mh) * (b - mh);
    }
    if vy == 0.0 || vh == 0.0 {
        return Ok(0.0);
    }
    Ok((cov * cov / (vy * vh)).min(1.0))
}

/// Sorted, duplicate-free set of symbol values.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolAlphabet(Vec<f64>);

impl SymbolAlphabet {
    pub fn new(symbols: Vec<f64>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::param("symbol alphabet is empty"));
        }
        if symbols.iter().any(|s| !s.is_finite()) || symbols.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("symbol alphabet must be finite and strictly increasing"));
        }
        Ok(Self(symbols))
    }

    /// The 4-PAM alphabet `{-3, -1, 1, 3}`.
    pub fn pam4() -> Self {
        Self(vec![-3.0, -1.0, 1.0, 3.0])
    }

    pub fn symbols(&self) -> &[f64] {
        &self.0
    }

    /// Nearest symbol; exact midpoints go to the lower one.
    pub fn quantize(&self, v: f64) -> f64 {
        let s = &self.0;
        let hi = s.partition_point(|&x| x < v);
        if hi == 0 {
            return s[0];
        }
        if hi == s.len() {
            return s[s.len() - 1];
        }
        let (a, b) = (s[hi - 1], s[hi]);
        if v - a <= b - v {
            a
        } else {
            b
        }
    }
}

pub fn quantize_symbols(yhat: &[f64], alphabet: &SymbolAlphabet) -> Vec<f64> {
    yhat.iter().map(|&v| alphabet.quantize(v)).collect()
}

/// Fraction of positions where the decided symbol differs from the sent one.
pub fn ser(d: &[f64], dhat: &[f64]) -> Result<f64> {
    check_pair(d, dhat)?;
    Ok(d.iter().zip(dhat).filter(|(a, b)| a != b).count() as f64 / d.len() as f64)
}

/// Time-averages each class score over every segment and returns the arg max
/// per segment (ties go to the lowest class index).
///
/// `scores[c][n]` is the score of class `c` at time `n`.
pub fn winner_takes_all<S: AsRef<[f64]>>(scores: &[S], segments: &[Range<usize>]) -> Result<Vec<usize>> {
    if scores.len() < 2 {
        return Err(Error::param("winner-takes-all needs at least two classes"));
    }
    let len = scores[0].as_ref().len();
    if scores.iter().any(|s| s.as_ref().len() != len) {
        return Err(Error::param("class score rows have different lengths"));
    }
    segments
        .iter()
        .map(|seg| {
            if seg.is_empty() || seg.end > len {
                return Err(Error::param(format!("segment {seg:?} is empty or exceeds {len} steps")));
            }
            let mut best = (0, f64::NEG_INFINITY);
            for (c, row) in scores.iter().enumerate() {
                let mean = row.as_ref()[seg.clone()].iter().sum::<f64>() / seg.len() as f64;
                if mean > best.1 {
                    best = (c, mean);
                }
            }
            Ok(best.0)
        })
        .collect()
}

pub fn wer(labels: &[usize], truth: &[usize]) -> Result<f64> {
    if labels.len() != truth.len() || labels.is_empty() {
        return Err(Error::param(format!("{} labels vs {} truths", labels.len(), truth.len())));
    }
    Ok(labels.iter().zip(truth).filter(|(a, b)| a != b).count() as f64 / labels.len() as f64)
}
