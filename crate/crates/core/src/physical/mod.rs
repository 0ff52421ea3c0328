//! Sample-level simulation of the optoelectronic delay loop.
//!
//! The masked input is held for `θ` samples per virtual node, the loop output
//! is delayed by `(N + k) θ` samples, and each sample obeys
//!
//! ```text
//! x(t) = sin(α F_lh(x(t - T) + n(t)) + β F_h(s(t)) + φ)
//! ```
//!
//! where `F_lh` is the lowpass/highpass cascade of the feedback path, `F_h` the
//! highpass seen by the input and `n(t)` white Gaussian noise. States are read
//! back by averaging the middle half of each `θ` window. With noise and
//! filters off the pipeline reduces exactly to [`crate::reservoir`].

mod bifurcation;
mod filter;
mod loop_sim;

pub use bifurcation::{
    bifurcation_scan, first_split, read_bifurcation_csv, write_bifurcation_csv, BifurcationRow,
    BifurcationSlice,
    Histogram, Level, HISTOGRAM_BINS, HISTOGRAM_RANGE,
};
pub use filter::{one_pole_highpass, one_pole_lowpass, realizable_cutoff, OnePole, MAX_CUTOFF_FRACTION};
pub use loop_sim::{extract_states, run_continuous, sample_and_hold, simulate_loop, window_means};

use serde::{Deserialize, Serialize};

use crate::reservoir::ReservoirParams;
use crate::{Error, Result};

/// Hardware-side settings of the loop; the operating point lives in
/// [`ReservoirParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopSettings {
    /// Samples per second of the simulated digitizer / waveform generator.
    pub sample_rate: f64,
    /// Samples per node slot `θ`.
    pub theta_samples: usize,
    /// Integer oversampling factor applied to both rate and `θ`.
    pub oversample: usize,
    pub lowpass_cutoff_hz: f64,
    pub highpass_cutoff_hz: f64,
    /// Standard deviation of the feedback noise, in units of `x`.
    pub noise_std: f64,
    pub filters_enabled: bool,
}

impl Default for LoopSettings {
    fn default() -> Self {
        Self {
            sample_rate: 2e8,
            theta_samples: 34,
            oversample: 1,
            lowpass_cutoff_hz: 1.25e8,
            highpass_cutoff_hz: 5e4,
            noise_std: 0.035,
            filters_enabled: true,
        }
    }
}

impl LoopSettings {
    /// Noise-free, filter-free loop: the setting under which the continuous
    /// model reproduces the discrete recursion.
    pub fn ideal() -> Self {
        Self {
            noise_std: 0.0,
            filters_enabled: false,
            ..Self::default()
        }
    }
}

/// Full parameter set of a continuous-loop simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub reservoir: ReservoirParams,
    pub settings: LoopSettings,
    pub noise_seed: u64,
}

impl PhysicalParams {
    pub fn new(reservoir: ReservoirParams, settings: LoopSettings, noise_seed: u64) -> Result<Self> {
        let p = Self {
            reservoir,
            settings,
            noise_seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.reservoir.validate()?;
        let s = &self.settings;
        if !(s.sample_rate > 0.0) || !s.sample_rate.is_finite() {
            return Err(Error::param("sample_rate must be positive"));
        }
        if s.theta_samples < 2 {
            return Err(Error::param("theta_samples must be at least 2"));
        }
        if s.oversample == 0 {
            return Err(Error::param("oversample must be at least 1"));
        }
        if !(s.highpass_cutoff_hz > 0.0) || !(s.highpass_cutoff_hz < s.lowpass_cutoff_hz) {
            return Err(Error::param(format!(
                "need 0 < highpass_cutoff_hz < lowpass_cutoff_hz, got {} and {}",
                s.highpass_cutoff_hz, s.lowpass_cutoff_hz
            )));
        }
        if !(s.noise_std >= 0.0) || !s.noise_std.is_finite() {
            return Err(Error::param("noise_std must be a finite non-negative number"));
        }
        Ok(())
    }

    /// Samples per node slot after oversampling.
    pub fn theta(&self) -> usize {
        self.settings.theta_samples * self.settings.oversample
    }

    /// Simulation rate after oversampling.
    pub fn rate(&self) -> f64 {
        self.settings.sample_rate * self.settings.oversample as f64
    }

    /// Loop delay `T = (N + k) θ` in samples.
    pub fn delay_samples(&self) -> usize {
        (self.reservoir.n_nodes + self.reservoir.desync_k) * self.theta()
    }
}

/// A uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogSignal {
    samples: Vec<f64>,
    rate: f64,
}

impl AnalogSignal {
    pub fn new(samples: Vec<f64>, rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::param(format!("signal rate must be positive, got {rate}")));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("signal contains non-finite samples"));
        }
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}
