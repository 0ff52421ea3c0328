//! Multi-channel feature corpora.
//!
//! ```text
//! channels=<K>
//! label=<int> steps=<L>
//! <K reals>        (L lines)
//! label=<int> steps=<L>
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{DatasetMeta, Segment, TaskDataset, Targets};
use crate::seed;
use crate::series::InputSequence;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub label: usize,
    /// One row of `K` channel values per time step.
    pub frames: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCorpus {
    pub channels: usize,
    pub utterances: Vec<Utterance>,
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

fn key_value<'a>(token: &'a str, key: &str, line: usize) -> Result<&'a str> {
    token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| format_err(line, format!("expected `{key}=<value>`, got `{token}`")))
}

impl FeatureCorpus {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or_else(|| format_err(1, "empty feature file"))?;
        let channels: usize = key_value(header, "channels", ln)?
            .parse()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| format_err(ln, "channel count must be a positive integer"))?;

        let mut utterances = Vec::new();
        while let Some((ln, line)) = lines.next() {
            let mut tokens = line.split_whitespace();
            let label = key_value(tokens.next().unwrap_or(""), "label", ln)?
                .parse::<usize>()
                .map_err(|_| format_err(ln, "label must be a non-negative integer"))?;
            let steps = key_value(tokens.next().unwrap_or(""), "steps", ln)?
                .parse::<usize>()
                .ok()
                .filter(|&s| s > 0)
                .ok_or_else(|| format_err(ln, "steps must be a positive integer"))?;
            if tokens.next().is_some() {
                return Err(format_err(ln, "trailing tokens after `steps`"));
            }
            let mut frames = Vec::with_capacity(steps);
            for _ in 0..steps {
                let (fl, frame) = lines
                    .next()
                    .ok_or_else(|| format_err(ln, format!("utterance declares {steps} steps, file ended early")))?;
                let row = frame
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| format_err(fl, "frame contains a non-numeric value"))?;
                if row.len() != channels {
                    return Err(format_err(fl, format!("expected {channels} values, found {}", row.len())));
                }
                frames.push(row);
            }
            utterances.push(Utterance { label, frames });
        }
        if utterances.is_empty() {
            return Err(format_err(ln, "no utterances"));
        }
        Ok(Self { channels, utterances })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("channels={}\n", self.channels);
        for u in &self.utterances {
            writeln!(s, "label={} steps={}", u.label, u.frames.len()).unwrap();
            for f in &u.frames {
                let row: Vec<String> = f.iter().map(|v| format!("{v:?}")).collect();
                writeln!(s, "{}", row.join(" ")).unwrap();
            }
        }
        s
    }

    /// Number of classes, `max label + 1`.
    pub fn n_classes(&self) -> usize {
        self.utterances.iter().map(|u| u.label).max().map_or(0, |m| m + 1)
    }

    /// Copy with i.i.d. Gaussian noise of standard deviation `std` added to
    /// every feature value.
    pub fn with_noise(&self, std: f64, seed: u64) -> Self {
        let mut rng = seed::rng_from_seed(seed);
        let mut out = self.clone();
        for u in &mut out.utterances {
            for v in u.frames.iter_mut().flatten() {
                *v += std * seed::normal(&mut rng);
            }
        }
        out
    }

    /// Concatenates utterances in file order; class `c` has target `+1` on its
    /// own segments and `-1` elsewhere.
    pub fn to_dataset(&self, source: &str) -> Result<TaskDataset> {
        let n_classes = self.n_classes();
        if n_classes < 2 {
            return Err(Error::param("a classification corpus needs at least two classes"));
        }
        let mut data = Vec::new();
        let mut segments = Vec::with_capacity(self.utterances.len());
        for u in &self.utterances {
            let start = data.len() / self.channels;
            data.extend(u.frames.iter().flatten());
            segments.push(Segment { range: start..start + u.frames.len(), label: u.label });
        }
        let len = data.len() / self.channels;
        let mut targets = vec![vec![-1.0; len]; n_classes];
        for s in &segments {
            targets[s.label][s.range.clone()].iter_mut().for_each(|v| *v = 1.0);
        }
        let mut meta = DatasetMeta::new("features", 0, &[("channels", self.channels as f64), ("classes", n_classes as f64)]);
        meta.generator = format!("features:{source}");
        TaskDataset::new(
            InputSequence::new(self.channels, data)?,
            Targets::PerClass(targets),
            Some(segments),
            meta,
        )
    }
}

/// Reads a feature file into a per-class classification dataset.
pub fn load_features(path: &Path) -> Result<TaskDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FeatureCorpus::parse(&text)?.to_dataset(&path.display().to_string())
}

/// Parameters of a synthetic, class-separable feature corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticCorpusSpec {
    pub classes: usize,
    pub per_class: usize,
    pub channels: usize,
    pub min_steps: usize,
    pub max_steps: usize,
    /// Standard deviation of per-frame jitter around the class template.
    pub jitter: f64,
    pub seed: u64,
}

/// Each class owns a random template: a channel offset in `[-0.5, 0.5]` plus a
/// slow sinusoid with class-specific frequency and phase per channel. An
/// utterance samples its class template over a random number of steps and adds
/// Gaussian jitter. Utterances are interleaved by class.
pub fn synthetic_corpus(spec: &SyntheticCorpusSpec) -> Result<FeatureCorpus> {
    if spec.classes < 2 || spec.per_class == 0 || spec.channels == 0 {
        return Err(Error::param("need >= 2 classes, >= 1 utterance per class and >= 1 channel"));
    }
    if spec.min_steps == 0 || spec.min_steps > spec.max_steps {
        return Err(Error::param("need 0 < min_steps <= max_steps"));
    }
    let mut rng = seed::rng_from_seed(spec.seed);
    let templates: Vec<Vec<(f64, f64, f64)>> = (0..spec.classes)
        .map(|_| {
            (0..spec.channels)
                .map(|_| {
                    let offset = seed::uniform(&mut rng, -0.5, 0.5);
                    let freq = seed::uniform(&mut rng, 0.5, 2.0);
                    let phase = seed::uniform(&mut rng, 0.0, std::f64::consts::TAU);
                    (offset, freq, phase)
                })
                .collect()
        })
        .collect();
    let mut utterances = Vec::with_capacity(spec.classes * spec.per_class);
    for _ in 0..spec.per_class {
        for (label, template) in templates.iter().enumerate() {
            let steps = spec.min_steps + seed::index(&mut rng, spec.max_steps - spec.min_steps + 1);
            let frames = (0..steps)
                .map(|t| {
                    let s = t as f64 / steps as f64;
                    template
                        .iter()
                        .map(|&(o, f, p)| {
                            o + 0.5 * (std::f64::consts::TAU * f * s + p).sin() + spec.jitter * seed::normal(&mut rng)
                        })
                        .collect()
                })
                .collect();
            utterances.push(Utterance { label, frames });
        }
    }
    Ok(FeatureCorpus { channels: spec.channels, utterances })
}
