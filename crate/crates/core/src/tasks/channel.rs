use serde::{Deserialize, Serialize};

use super::{DatasetMeta, TaskDataset, Targets};
use crate::seed;
use crate::series::InputSequence;
use crate::{Error, Result};

/// Taps of the linear channel, `CHANNEL_TAPS[j]` multiplying `d(n + 2 - j)`.
pub const CHANNEL_TAPS: [f64; 10] = [0.08, -0.12, 1.0, 0.18, -0.1, 0.091, -0.05, 0.04, 0.03, 0.01];
/// Future symbols seen by `q(n)`.
pub const CHANNEL_LEAD: usize = 2;
/// Past symbols seen by `q(n)`.
pub const CHANNEL_LAG: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub snr_db: f64,
    /// Number of emitted `(u(n), d(n - delay))` pairs.
    pub length: usize,
    pub seed: u64,
    /// The target for input `u(n)` is `d(n - decision_delay)`.
    #[serde(default)]
    pub decision_delay: usize,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.snr_db.is_finite() {
            return Err(Error::param("snr_db must be finite"));
        }
        if self.length <= 15 {
            return Err(Error::param(format!("channel length must exceed 15, got {}", self.length)));
        }
        Ok(())
    }
}

/// `q(n) = Σ_j CHANNEL_TAPS[j] d(n + 2 - j)` for every `n` with a full
/// window, i.e. `n = 7 .. d.len() - 2`. Entry `0` of the result is `q(7)`.
pub fn linear_channel(d: &[f64]) -> Result<Vec<f64>> {
    let span = CHANNEL_TAPS.len();
    if d.len() < span {
        return Err(Error::param(format!("channel needs at least {span} symbols")));
    }
    Ok(d.windows(span)
        .map(|w| {
            // w[0] = d(n - 7), w[9] = d(n + 2)
            w.iter().rev().zip(&CHANNEL_TAPS).map(|(x, c)| c * x).sum()
        })
        .collect())
}

/// Memoryless distortion `q + 0.036 q² - 0.011 q³`.
pub fn channel_nonlinearity(q: f64) -> f64 {
    q + 0.036 * q * q - 0.011 * q * q * q
}

/// All intermediate signals of one channel realization, aligned on the
/// emitted time indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSignals {
    /// Sent symbols `d(n)`.
    pub d: Vec<f64>,
    pub q: Vec<f64>,
    pub noise: Vec<f64>,
    /// Received `u(n) = nl(q(n)) + ν(n)`.
    pub u: Vec<f64>,
    /// Targets `d(n - decision_delay)`.
    pub target: Vec<f64>,
}

/// Draws symbols uniformly from `{-3, -1, 1, 3}` and passes them through the
/// channel. The noise variance is `P_q 10^(-snr/10)` with `P_q` the empirical
/// power of the emitted `q`.
pub fn channel_signals(config: &ChannelConfig) -> Result<ChannelSignals> {
    config.validate()?;
    let delay = config.decision_delay;
    let total = config.length + delay + CHANNEL_LAG + CHANNEL_LEAD;
    let mut rng = seed::rng_from_seed(config.seed);
    const SYMBOLS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];
    let d_all: Vec<f64> = (0..total).map(|_| SYMBOLS[seed::index(&mut rng, 4)]).collect();
    // q_all[j] = q(j + 7)
    let q_all = linear_channel(&d_all)?;
    let q = q_all[delay..].to_vec();
    let p_q = q.iter().map(|v| v * v).sum::<f64>() / q.len() as f64;
    let sigma = (p_q * 10f64.powf(-config.snr_db / 10.0)).sqrt();
    let noise: Vec<f64> = (0..q.len()).map(|_| sigma * seed::normal(&mut rng)).collect();
    let u = q.iter().zip(&noise).map(|(&q, &v)| channel_nonlinearity(q) + v).collect();
    let first = CHANNEL_LAG + delay;
    Ok(ChannelSignals {
        d: d_all[first..first + config.length].to_vec(),
        target: d_all[CHANNEL_LAG..CHANNEL_LAG + config.length].to_vec(),
        q,
        noise,
        u,
    })
}

/// Equalization dataset: inputs `u(n)`, targets `d(n - decision_delay)`.
pub fn gen_channel(config: &ChannelConfig) -> Result<TaskDataset> {
    let s = channel_signals(config)?;
    let meta = DatasetMeta::new(
        "channel",
        config.seed,
        &[
            ("snr_db", config.snr_db),
            ("length", config.length as f64),
            ("decision_delay", config.decision_delay as f64),
        ],
    );
    TaskDataset::new(InputSequence::scalar(s.u)?, Targets::Scalar(s.target), None, meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_convolution(d: &[f64], n: usize) -> f64 {
        let at = |k: isize| d[(n as isize + k) as usize];
        0.08 * at(2) - 0.12 * at(1) + at(0) + 0.18 * at(-1) - 0.1 * at(-2) + 0.091 * at(-3) - 0.05 * at(-4)
            + 0.04 * at(-5)
            + 0.03 * at(-6)
            + 0.01 * at(-7)
    }

    #[test]
    fn impulse_probe_returns_taps() {
        let mut d = vec![0.0; 19];
        d[9] = 1.0;
        let q = linear_channel(&d).unwrap();
        assert_eq!(q.len(), 10);
        // q(7) sees d(9) through the d(n+2) tap, q(16) through d(n-7)
        assert_eq!(q, CHANNEL_TAPS.to_vec());
        let mut reversed = q.clone();
        reversed.reverse();
        assert_eq!(reversed, vec![0.01, 0.03, 0.04, -0.05, 0.091, -0.1, 0.18, 1.0, -0.12, 0.08]);
    }

    #[test]
    fn matches_direct_convolution() {
        let mut rng = seed::rng_from_seed(1);
        let d: Vec<f64> = (0..300).map(|_| seed::uniform(&mut rng, -3.0, 3.0)).collect();
        let q = linear_channel(&d).unwrap();
        assert_eq!(q.len(), 291);
        for (j, v) in q.iter().enumerate() {
            assert!((v - direct_convolution(&d, j + 7)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_symbols_leave_only_noise() {
        let q = linear_channel(&[0.0; 30]).unwrap();
        assert!(q.iter().all(|&v| v == 0.0));
        assert_eq!(channel_nonlinearity(0.0), 0.0);
        assert!((channel_nonlinearity(2.0) - (2.0 + 0.144 - 0.088)).abs() < 1e-15);
    }

    #[test]
    fn empirical_snr() {
        for snr in [12.0, 32.0] {
            let s = channel_signals(&ChannelConfig { snr_db: snr, length: 9000, seed: 3, decision_delay: 0 }).unwrap();
            let pq = s.q.iter().map(|v| v * v).sum::<f64>();
            let pn = s.noise.iter().map(|v| v * v).sum::<f64>();
            let measured = 10.0 * (pq / pn).log10();
            assert!((measured - snr).abs() < 0.3, "{measured} vs {snr}");
        }
    }

    #[test]
    fn symbols_and_alignment() {
        let cfg = ChannelConfig { snr_db: 20.0, length: 500, seed: 4, decision_delay: 2 };
        let s = channel_signals(&cfg).unwrap();
        assert!(s.d.iter().all(|v| [-3.0, -1.0, 1.0, 3.0].contains(v)));
        assert_eq!(&s.d[..498], &s.target[2..]);
        let counts = [-3.0, -1.0, 1.0, 3.0].map(|x| s.d.iter().filter(|&&v| v == x).count() as f64);
        // each symbol 1/4 of the time, 4σ binomial band
        let sd = (500.0 * 0.25 * 0.75f64).sqrt();
        assert!(counts.iter().all(|c| (c - 125.0).abs() < 4.0 * sd));

        let no_delay = channel_signals(&ChannelConfig { decision_delay: 0, ..cfg }).unwrap();
        assert_eq!(no_delay.d, no_delay.target);
        assert!(channel_signals(&ChannelConfig { length: 15, ..cfg }).is_err());
    }

    #[test]
    fn received_signal_composition() {
        let s = channel_signals(&ChannelConfig { snr_db: 16.0, length: 100, seed: 5, decision_delay: 1 }).unwrap();
        for i in 0..100 {
            assert_eq!(s.u[i], channel_nonlinearity(s.q[i]) + s.noise[i]);
        }
    }
}
