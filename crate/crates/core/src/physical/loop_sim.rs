use rand_chacha::ChaCha8Rng;

use super::{AnalogSignal, OnePole, PhysicalParams};
use crate::reservoir::InputMask;
use crate::seed;
use crate::series::{InputSequence, StateMatrix};
use crate::{Error, Result};

/// Sample-by-sample state of the delay loop.
pub(crate) struct LoopSimulator {
    delay: Vec<f64>,
    pos: usize,
    feedback_hp: OnePole,
    feedback_lp: OnePole,
    drive_hp: OnePole,
    noise_std: f64,
    rng: ChaCha8Rng,
    alpha: f64,
    beta: f64,
    phi: f64,
}

impl LoopSimulator {
    /// Loop with zero history.
    pub(crate) fn new(params: &PhysicalParams) -> Result<Self> {
        params.validate()?;
        let s = &params.settings;
        let (feedback_hp, feedback_lp, drive_hp) = if s.filters_enabled {
            let rate = params.rate();
            (
                OnePole::highpass(rate, s.highpass_cutoff_hz)?,
                OnePole::lowpass(rate, s.lowpass_cutoff_hz)?,
                OnePole::highpass(rate, s.highpass_cutoff_hz)?,
            )
        } else {
            (OnePole::identity(), OnePole::identity(), OnePole::identity())
        };
        Ok(Self {
            delay: vec![0.0; params.delay_samples()],
            pos: 0,
            feedback_hp,
            feedback_lp,
            drive_hp,
            noise_std: s.noise_std,
            rng: seed::rng_from_seed(params.noise_seed),
            alpha: params.reservoir.feedback_gain,
            beta: params.reservoir.input_gain,
            phi: params.reservoir.bias,
        })
    }

    /// Replaces the delay-line history (`history[0]` is the oldest sample).
    pub(crate) fn with_history(mut self, history: Vec<f64>) -> Result<Self> {
        if history.len() != self.delay.len() {
            return Err(Error::param(format!(
                "history has {} samples, loop delay is {}",
                history.len(),
                self.delay.len()
            )));
        }
        self.delay = history;
        self.pos = 0;
        Ok(self)
    }

    /// Advances one sample given the (unfiltered, ungained) input drive.
    #[inline]
    pub(crate) fn tick(&mut self, drive: f64) -> f64 {
        let mut feedback = self.delay[self.pos];
        if self.noise_std > 0.0 {
            feedback += self.noise_std * seed::normal(&mut self.rng);
        }
        let feedback = self.feedback_lp.process(self.feedback_hp.process(feedback));
        let drive = self.drive_hp.process(drive);
        let x = (self.alpha * feedback + self.beta * drive + self.phi).sin();
        self.delay[self.pos] = x;
        self.pos += 1;
        if self.pos == self.delay.len() {
            self.pos = 0;
        }
        x
    }

    /// Holds `drive` for one `θ` window and returns the middle-half mean.
    #[inline]
    pub(crate) fn slot_mean(&mut self, drive: f64, theta: usize) -> f64 {
        let keep = middle_half(theta);
        let mut sum = 0.0;
        for s in 0..theta {
            let y = self.tick(drive);
            if keep.contains(&s) {
                sum += y;
            }
        }
        sum / keep.len() as f64
    }
}

/// Index range of the samples averaged within one `θ` window.
fn middle_half(theta: usize) -> std::ops::Range<usize> {
    let q = theta / 4;
    q..theta - q
}

fn check_mask(inputs: &InputSequence, mask: &InputMask, n_nodes: usize) -> Result<()> {
    if mask.n_nodes() != n_nodes {
        return Err(Error::param(format!(
            "mask has {} nodes, expected {n_nodes}",
            mask.n_nodes()
        )));
    }
    if mask.n_inputs() != inputs.n_channels() {
        return Err(Error::param(format!(
            "mask expects {} input channels, sequence has {}",
            mask.n_inputs(),
            inputs.n_channels()
        )));
    }
    Ok(())
}

/// Piecewise-constant drive: node slot `(n, i)` holds `Σ_j b_ij u_j(n)` for
/// `theta_samples` samples.
pub fn sample_and_hold(
    inputs: &InputSequence,
    mask: &InputMask,
    theta_samples: usize,
    n_nodes: usize,
    rate: f64,
) -> Result<AnalogSignal> {
    check_mask(inputs, mask, n_nodes)?;
    if theta_samples == 0 {
        return Err(Error::param("theta_samples must be positive"));
    }
    let mut held = vec![0.0; n_nodes];
    let mut samples = Vec::with_capacity(inputs.len() * n_nodes * theta_samples);
    for u in inputs.steps() {
        mask.project_into(u, &mut held);
        for &v in &held {
            samples.extend(std::iter::repeat_n(v, theta_samples));
        }
    }
    AnalogSignal::new(samples, rate)
}

/// Runs the loop over a drive signal and returns the loop output `x(t)`.
pub fn simulate_loop(params: &PhysicalParams, drive: &AnalogSignal) -> Result<AnalogSignal> {
    let theta = params.theta();
    if !drive.len().is_multiple_of(theta) {
        return Err(Error::param(format!(
            "drive length {} is not a multiple of theta = {theta} samples",
            drive.len()
        )));
    }
    if ((drive.rate() - params.rate()) / params.rate()).abs() > 1e-12 {
        return Err(Error::param(format!(
            "drive sampled at {} samples/s, loop runs at {}",
            drive.rate(),
            params.rate()
        )));
    }
    let mut sim = LoopSimulator::new(params)?;
    let out = drive.samples().iter().map(|&s| sim.tick(s)).collect();
    AnalogSignal::new(out, params.rate())
}

/// Mean of the middle half (indices `⌊θ/4⌋ ..= θ - ⌊θ/4⌋ - 1`) of every
/// consecutive `θ`-sample window.
pub fn window_means(signal: &AnalogSignal, theta_samples: usize) -> Result<Vec<f64>> {
    if theta_samples < 2 {
        return Err(Error::param("theta_samples must be at least 2"));
    }
    if !signal.len().is_multiple_of(theta_samples) {
        return Err(Error::param(format!(
            "signal length {} is not a multiple of theta = {theta_samples} samples",
            signal.len()
        )));
    }
    let keep = middle_half(theta_samples);
    let count = keep.len() as f64;
    Ok(signal
        .samples()
        .chunks_exact(theta_samples)
        .map(|w| w[keep.clone()].iter().sum::<f64>() / count)
        .collect())
}

/// Reads `x_i(n)` back from a loop output as [`window_means`] arranged into
/// `N` nodes per step.
pub fn extract_states(signal: &AnalogSignal, theta_samples: usize, n_nodes: usize) -> Result<StateMatrix> {
    if n_nodes == 0 {
        return Err(Error::param("n_nodes must be positive"));
    }
    if !signal.len().is_multiple_of(theta_samples.max(1) * n_nodes) {
        return Err(Error::param(format!(
            "signal length {} is not a whole number of {n_nodes} windows of {theta_samples} samples",
            signal.len()
        )));
    }
    StateMatrix::new(n_nodes, window_means(signal, theta_samples)?)
}

/// Streams inputs through sample-and-hold, the loop and state extraction
/// without materializing the sample-level signals.
///
/// Bit-identical to `extract_states(simulate_loop(sample_and_hold(..)))`.
pub fn run_continuous(params: &PhysicalParams, mask: &InputMask, inputs: &InputSequence) -> Result<StateMatrix> {
    let n = params.reservoir.n_nodes;
    check_mask(inputs, mask, n)?;
    let theta = params.theta();
    let mut sim = LoopSimulator::new(params)?;
    let mut held = vec![0.0; n];
    let mut column = vec![0.0; n];
    let mut states = StateMatrix::with_capacity(n, inputs.len());
    for u in inputs.steps() {
        mask.project_into(u, &mut held);
        for (x, &drive) in column.iter_mut().zip(&held) {
            *x = sim.slot_mean(drive, theta);
        }
        states.push_column(&column);
    }
    Ok(states)
}
