use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::physical::{LoopSettings, PhysicalParams};
use crate::readout::RegressionConfig;
use crate::reservoir::{MaskDistribution, ReservoirParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Discrete,
    Continuous,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Discrete => "discrete",
            Backend::Continuous => "continuous",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(Backend::Discrete),
            "continuous" => Ok(Backend::Continuous),
            _ => Err(Error::Config(format!("unknown backend `{s}` (discrete | continuous)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NarmaTask {
    pub train: usize,
    pub test: usize,
}

impl Default for NarmaTask {
    fn default() -> Self {
        Self { train: 1000, test: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelTask {
    pub snr_db: f64,
    pub train: usize,
    pub test: usize,
    /// Symbols of lag between received sample and decided symbol.
    pub decision_delay: usize,
}

impl Default for ChannelTask {
    fn default() -> Self {
        Self {
            snr_db: 28.0,
            train: 3000,
            test: 6000,
            decision_delay: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SineSquareTask {
    pub train_segments: usize,
    pub test_segments: usize,
}

impl Default for SineSquareTask {
    fn default() -> Self {
        Self {
            train_segments: 1000,
            test_segments: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryTask {
    pub max_delay: usize,
    pub train: usize,
    pub test: usize,
}

impl Default for MemoryTask {
    fn default() -> Self {
        Self {
            max_delay: 100,
            train: 4000,
            test: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesTask {
    /// Feature file, relative to the config file.
    pub path: PathBuf,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Extra Gaussian noise added to every feature value, per trial.
    #[serde(default)]
    pub noise_std: f64,
}

fn default_folds() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskConfig {
    Narma10(NarmaTask),
    Channel(ChannelTask),
    SineSquare(SineSquareTask),
    Memory(MemoryTask),
    Features(FeaturesTask),
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Narma10(_) => "narma10",
            TaskConfig::Channel(_) => "channel",
            TaskConfig::SineSquare(_) => "sine_square",
            TaskConfig::Memory(_) => "memory",
            TaskConfig::Features(_) => "features",
        }
    }

    pub fn snr_db(&self) -> Option<f64> {
        match self {
            TaskConfig::Channel(c) => Some(c.snr_db),
            _ => None,
        }
    }
}

/// Value lists whose cartesian product forms a sweep grid. Empty lists keep
/// the base configuration's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_nodes: Vec<usize>,
    pub desync_k: Vec<usize>,
    pub feedback_gain: Vec<f64>,
    pub input_gain: Vec<f64>,
    pub bias: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub ridge_lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BifurcationConfig {
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_step: f64,
    pub steps_per_alpha: usize,
    pub transient_discard: usize,
    /// Bins holding less than this fraction of the states count as empty.
    pub min_fraction: f64,
}

impl Default for BifurcationConfig {
    fn default() -> Self {
        Self {
            alpha_start: 0.0,
            alpha_stop: 4.2,
            alpha_step: 0.01,
            steps_per_alpha: 200,
            transient_discard: 1000,
            min_fraction: 1e-3,
        }
    }
}

impl BifurcationConfig {
    /// `alpha_start, alpha_start + step, ...` up to and including `alpha_stop`
    /// (within a 1e-9 step tolerance), rounded to 12 decimals so that
    /// `0.7` is not reported as `0.7000000000000001`.
    pub fn alpha_grid(&self) -> Vec<f64> {
        let n = ((self.alpha_stop - self.alpha_start) / self.alpha_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| ((self.alpha_start + i as f64 * self.alpha_step) * 1e12).round() / 1e12)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    /// Result directory, relative to the config file.
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskConfig>,
    pub reservoir: ReservoirParams,
    #[serde(default = "default_mask")]
    pub mask: MaskDistribution,
    #[serde(default)]
    pub readout: RegressionConfig,
    #[serde(default)]
    pub physical: LoopSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bifurcation: Option<BifurcationConfig>,
}

fn default_trials() -> usize {
    1
}

fn default_backend() -> Backend {
    Backend::Discrete
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_mask() -> MaskDistribution {
    MaskDistribution::Uniform { lo: -1.0, hi: 1.0 }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Parses a config file and resolves its relative paths against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.output = base.join(&cfg.output);
        if let Some(TaskConfig::Features(f)) = &mut cfg.task {
            f.path = base.join(&f.path);
        }
        Ok(cfg)
    }

    pub fn task(&self) -> Result<&TaskConfig> {
        self.task
            .as_ref()
            .ok_or_else(|| Error::Config("config has no [task] section".into()))
    }

    pub fn physical_params(&self, noise_seed: u64) -> Result<PhysicalParams> {
        PhysicalParams::new(self.reservoir, self.physical, noise_seed).map_err(config_error)
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.reservoir.validate().map_err(config_error)?;
        self.mask.validate().map_err(config_error)?;
        self.readout.validate().map_err(config_error)?;
        if self.backend == Backend::Continuous {
            self.physical_params(0)?;
        }
        if let Some(task) = &self.task {
            self.validate_task(task)?;
        }
        if let Some(sweep) = &self.sweep {
            for point in super::sweep::grid(self, sweep) {
                point.reservoir.validate().map_err(config_error)?;
                point.readout.validate().map_err(config_error)?;
                if let Some(task) = &point.task {
                    point.validate_task(task)?;
                }
            }
        }
        if let Some(b) = &self.bifurcation {
            if !(b.alpha_step > 0.0) || !(b.alpha_start <= b.alpha_stop) {
                return Err(Error::Config("bifurcation needs alpha_step > 0 and alpha_start <= alpha_stop".into()));
            }
            if b.steps_per_alpha == 0 {
                return Err(Error::Config("bifurcation steps_per_alpha must be positive".into()));
            }
            if !(0.0..1.0).contains(&b.min_fraction) {
                return Err(Error::Config("bifurcation min_fraction must lie in [0, 1)".into()));
            }
            self.physical_params(0)?;
        }
        Ok(())
    }

    fn validate_task(&self, task: &TaskConfig) -> Result<()> {
        let washout = self.readout.washout;
        let need = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::Config(msg)) };
        match task {
            TaskConfig::Narma10(t) => need(
                t.train > washout && t.test > 0,
                format!("narma10 needs train > washout ({washout}) and test > 0"),
            ),
            TaskConfig::Channel(t) => {
                need(t.snr_db.is_finite(), "channel snr_db must be finite".into())?;
                need(
                    t.train > washout && t.test > 0 && t.train + t.test > 15,
                    format!("channel needs train > washout ({washout}) and test > 0"),
                )
            }
            TaskConfig::SineSquare(t) => need(
                t.train_segments * crate::tasks::SEGMENT_LEN > washout && t.test_segments > 0,
                "sine_square needs more training samples than the washout and test_segments > 0".into(),
            ),
            TaskConfig::Memory(t) => need(
                t.max_delay > 0 && washout >= t.max_delay && t.train > 0 && t.test > 0,
                format!("memory needs max_delay > 0, washout ({washout}) >= max_delay, train and test > 0"),
            ),
            TaskConfig::Features(t) => {
                need(t.folds >= 2, "features needs folds >= 2".into())?;
                need(t.noise_std >= 0.0, "features noise_std must be non-negative".into())
            }
        }
    }
}

pub(crate) fn config_error(e: Error) -> Error {
    match e {
        Error::Parameter(m) => Error::Config(m),
        e => e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NARMA: &str = r#"
trials = 3
master_seed = 7

[task]
kind = "narma10"
train = 400

[reservoir]
n_nodes = 20
feedback_gain = 0.8
input_gain = 0.3

[mask]
distribution = "uniform"
lo = 0.0
hi = 1.0

[readout]
ridge_lambda = 1e-8
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml(NARMA).unwrap();
        assert_eq!(c.backend, Backend::Discrete);
        assert_eq!(c.task, Some(TaskConfig::Narma10(NarmaTask { train: 400, test: 1000 })));
        assert_eq!(c.reservoir.desync_k, 1);
        assert_eq!(c.readout.washout, 50);
        assert!(c.readout.intercept);
        assert_eq!(c.physical, LoopSettings::default());
        c.validate().unwrap();
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = ExperimentConfig::from_toml(NARMA).unwrap();
        c.sweep = Some(SweepConfig { feedback_gain: vec![0.1, 0.2], ..Default::default() });
        c.bifurcation = Some(BifurcationConfig::default());
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
        c.task = Some(TaskConfig::Features(FeaturesTask { path: "x.txt".into(), folds: 5, noise_std: 0.5 }));
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(ExperimentConfig::from_toml("trials = 2"), Err(Error::Config(_))));
        let typo = NARMA.replace("master_seed", "master_sed");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
        let typo = NARMA.replace("train = 400", "trian = 400");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
        for (from, to) in [
            ("feedback_gain = 0.8", "feedback_gain = 5.0"),
            ("train = 400", "train = 10"),
            ("trials = 3", "trials = 0"),
            ("hi = 1.0", "hi = -1.0"),
            ("ridge_lambda = 1e-8", "ridge_lambda = -1.0"),
        ] {
            let c = ExperimentConfig::from_toml(&NARMA.replace(from, to)).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{to}");
        }
    }

    #[test]
    fn resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let text = NARMA.replace("kind = \"narma10\"\ntrain = 400", "kind = \"features\"\npath = \"data/f.txt\"");
        let path = dir.path().join("c.toml");
        std::fs::write(&path, text).unwrap();
        let c = ExperimentConfig::from_file(&path).unwrap();
        assert_eq!(c.output, dir.path().join("results"));
        let Some(TaskConfig::Features(f)) = &c.task else { panic!() };
        assert_eq!(f.path, dir.path().join("data/f.txt"));
    }

    #[test]
    fn alpha_grid_includes_stop() {
        let b = BifurcationConfig { alpha_start: 0.5, alpha_stop: 1.0, alpha_step: 0.1, ..Default::default() };
        let g = b.alpha_grid();
        assert_eq!(g, vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
    }
}
