use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use super::AnalogSignal;
use crate::{Error, Result};

/// Highest usable cutoff as a fraction of the sample rate.
pub const MAX_CUTOFF_FRACTION: f64 = 0.49;

static CLAMP_WARNED: AtomicBool = AtomicBool::new(false);

/// Cutoff actually realized at `rate`, clamped below Nyquist.
///
/// Returns the clamped value and whether clamping happened; the first clamp in
/// a process logs a warning.
pub fn realizable_cutoff(rate: f64, cutoff_hz: f64) -> (f64, bool) {
    let limit = MAX_CUTOFF_FRACTION * rate;
    if cutoff_hz >= rate / 2.0 {
        if !CLAMP_WARNED.swap(true, Ordering::Relaxed) {
            log::warn!(
                "cutoff {cutoff_hz:.4e} Hz is at or above Nyquist for {rate:.4e} samples/s; \
                 clamping to {limit:.4e} Hz (raise the oversampling factor for an accurate lowpass)"
            );
        }
        (limit, true)
    } else {
        (cutoff_hz, false)
    }
}

/// First-order IIR section from the bilinear transform, prewarped so the
/// -3 dB point sits exactly at the cutoff.
///
/// `y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnePole {
    b0: f64,
    b1: f64,
    a1: f64,
    prev_x: f64,
    prev_y: f64,
}

impl OnePole {
    pub fn lowpass(rate: f64, cutoff_hz: f64) -> Result<Self> {
        let k = warped_gain(rate, cutoff_hz)?;
        let norm = 1.0 / (1.0 + k);
        Ok(Self::from_coefficients(k * norm, k * norm, (k - 1.0) * norm))
    }

    pub fn highpass(rate: f64, cutoff_hz: f64) -> Result<Self> {
        let k = warped_gain(rate, cutoff_hz)?;
        let norm = 1.0 / (1.0 + k);
        Ok(Self::from_coefficients(norm, -norm, (k - 1.0) * norm))
    }

    /// Pass-through section.
    pub fn identity() -> Self {
        Self::from_coefficients(1.0, 0.0, 0.0)
    }

    fn from_coefficients(b0: f64, b1: f64, a1: f64) -> Self {
        Self {
            b0,
            b1,
            a1,
            prev_x: 0.0,
            prev_y: 0.0,
        }
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.b1 * self.prev_x - self.a1 * self.prev_y;
        self.prev_x = x;
        self.prev_y = y;
        y
    }

    pub fn reset(&mut self) {
        self.prev_x = 0.0;
        self.prev_y = 0.0;
    }
}

fn warped_gain(rate: f64, cutoff_hz: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::param(format!("sample rate must be positive, got {rate}")));
    }
    if !(cutoff_hz > 0.0) || !cutoff_hz.is_finite() {
        return Err(Error::param(format!("cutoff must be positive, got {cutoff_hz}")));
    }
    let (cutoff, _) = realizable_cutoff(rate, cutoff_hz);
    Ok((PI * cutoff / rate).tan())
}

fn filter_signal(signal: &AnalogSignal, mut filter: OnePole) -> Result<AnalogSignal> {
    if signal.is_empty() {
        return Err(Error::param("cannot filter an empty signal"));
    }
    let samples = signal.samples().iter().map(|&x| filter.process(x)).collect();
    AnalogSignal::new(samples, signal.rate())
}

/// First-order lowpass (unity DC gain) at the signal's rate.
pub fn one_pole_lowpass(signal: &AnalogSignal, cutoff_hz: f64) -> Result<AnalogSignal> {
    filter_signal(signal, OnePole::lowpass(signal.rate(), cutoff_hz)?)
}

/// First-order highpass (zero DC gain) at the signal's rate.
pub fn one_pole_highpass(signal: &AnalogSignal, cutoff_hz: f64) -> Result<AnalogSignal> {
    filter_signal(signal, OnePole::highpass(signal.rate(), cutoff_hz)?)
}
