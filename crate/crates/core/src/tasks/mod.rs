//! Benchmark datasets: NARMA10, nonlinear channel equalization, sine/square
//! classification, memory recall, and externally supplied feature corpora.
//!
//! Every generator is a pure function of its parameters and seed, and records
//! both in [`DatasetMeta`] so [`TaskDataset::regenerate`] can rebuild it.

mod channel;
mod features;
mod memory;
mod narma;
mod sine_square;

pub use channel::{
    channel_nonlinearity, channel_signals, gen_channel, linear_channel, ChannelConfig, ChannelSignals,
    CHANNEL_LAG, CHANNEL_LEAD, CHANNEL_TAPS,
};
pub use features::{load_features, synthetic_corpus, FeatureCorpus, SyntheticCorpusSpec, Utterance};
pub use memory::{gen_memory_task, memory_capacity, memory_targets, MemoryCapacity, MemoryCapacityConfig};
pub use narma::{gen_narma10, narma10_response};
pub use sine_square::{gen_sine_square, SEGMENT_LEN};

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use crate::series::InputSequence;
use crate::{Error, Result};

/// Target values aligned with the inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Scalar(Vec<f64>),
    /// One `±1` row per class.
    PerClass(Vec<Vec<f64>>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Scalar(y) => y.len(),
            Targets::PerClass(rows) => rows.first().map_or(0, Vec::len),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_scalar(&self) -> Option<&[f64]> {
        match self {
            Targets::Scalar(y) => Some(y),
            Targets::PerClass(_) => None,
        }
    }
}

/// A labelled stretch of consecutive time steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub range: Range<usize>,
    pub label: usize,
}

/// How a dataset was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub generator: String,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    /// Times the generator discarded a draw and retried with a derived seed.
    pub regenerations: u32,
}

impl DatasetMeta {
    pub(crate) fn new(generator: &str, seed: u64, params: &[(&str, f64)]) -> Self {
        Self {
            generator: generator.to_owned(),
            seed,
            params: params.iter().map(|&(k, v)| (k.to_owned(), v)).collect(),
            regenerations: 0,
        }
    }

    fn param(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::param(format!("{} metadata lacks `{key}`", self.generator)))
    }

    fn count(&self, key: &str) -> Result<usize> {
        let v = self.param(key)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::param(format!("`{key}` = {v} is not a count")));
        }
        Ok(v as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub inputs: InputSequence,
    pub targets: Targets,
    /// Utterance or waveform boundaries for classification tasks.
    pub segments: Option<Vec<Segment>>,
    pub meta: DatasetMeta,
}

impl TaskDataset {
    pub(crate) fn new(
        inputs: InputSequence,
        targets: Targets,
        segments: Option<Vec<Segment>>,
        meta: DatasetMeta,
    ) -> Result<Self> {
        if targets.len() != inputs.len() {
            return Err(Error::param(format!(
                "{} targets for {} input steps",
                targets.len(),
                inputs.len()
            )));
        }
        if let Targets::PerClass(rows) = &targets {
            if rows.iter().any(|r| r.len() != inputs.len()) {
                return Err(Error::param("class target rows have different lengths"));
            }
        }
        Ok(Self {
            inputs,
            targets,
            segments,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Rebuilds a generated dataset from its metadata alone.
    pub fn regenerate(meta: &DatasetMeta) -> Result<Self> {
        match meta.generator.as_str() {
            "narma10" => gen_narma10(meta.count("length")?, meta.seed),
            "channel" => gen_channel(&ChannelConfig {
                snr_db: meta.param("snr_db")?,
                length: meta.count("length")?,
                seed: meta.seed,
                decision_delay: meta.count("decision_delay")?,
            }),
            "sine_square" => gen_sine_square(meta.count("n_segments")?, meta.seed),
            "memory" => {
                let pair = match meta.params.get("pair_delay") {
                    Some(_) => Some(meta.count("pair_delay")?),
                    None => None,
                };
                gen_memory_task(meta.count("length")?, meta.count("delay")?, pair, meta.seed)
            }
            other => Err(Error::param(format!("datasets from `{other}` cannot be regenerated"))),
        }
    }

    /// CSV with columns `n, u_1..u_K, y`. For class targets `y` is the
    /// segment label.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv_to(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let k = self.inputs.n_channels();
        let mut header = vec!["n".to_owned()];
        header.extend((1..=k).map(|j| format!("u_{j}")));
        header.push("y".into());
        writeln!(out, "{}", header.join(","))?;
        let labels = self.step_labels();
        for (n, u) in self.inputs.steps().enumerate() {
            write!(out, "{n}")?;
            for v in u {
                write!(out, ",{v:?}")?;
            }
            match (&self.targets, &labels) {
                (Targets::Scalar(y), _) => writeln!(out, ",{:?}", y[n])?,
                (Targets::PerClass(_), Some(l)) => writeln!(out, ",{}", l[n])?,
                (Targets::PerClass(_), None) => writeln!(out, ",")?,
            }
        }
        Ok(())
    }

    fn step_labels(&self) -> Option<Vec<usize>> {
        let segs = self.segments.as_ref()?;
        let mut labels = vec![0; self.len()];
        for s in segs {
            labels[s.range.clone()].iter_mut().for_each(|l| *l = s.label);
        }
        Some(labels)
    }
}

/// Reads back a CSV written by [`TaskDataset::write_csv`] as `(inputs, y)`.
pub fn read_dataset_csv(path: &Path) -> Result<(InputSequence, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv_at(path, e))?;
    let k = r.headers().map_err(|e| Error::csv_at(path, e))?.len().checked_sub(2).filter(|&k| k > 0).ok_or_else(|| Error::Format {
        line: 1,
        message: "expected columns n, u_1..u_K, y".into(),
    })?;
    let mut u = Vec::new();
    let mut y = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv_at(path, e))?;
        let field = |j: usize| {
            rec[j].parse::<f64>().map_err(|_| Error::Format {
                line: i + 2,
                message: format!("`{}` is not a number", &rec[j]),
            })
        };
        for j in 1..=k {
            u.push(field(j)?);
        }
        y.push(field(k + 1)?);
    }
    Ok((InputSequence::new(k, u)?, y))
}
