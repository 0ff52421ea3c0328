//! Idealized discrete-time dynamics of the delay-line reservoir.
//!
//! A single sine nonlinearity with delayed feedback is time-multiplexed into
//! `N` virtual nodes. With the input hold time equal to the loop period the
//! nodes evolve independently:
//!
//! ```text
//! x_i(n) = sin(α x_i(n-1) + β m_i u(n) + φ)
//! ```
//!
//! Shortening the hold time by `k` node slots couples each node to its
//! `k`-th predecessor, with the first `k` nodes wrapping around to the state
//! two steps back:
//!
//! ```text
//! x_i(n) = sin(α x_{i-k}(n-1)   + β m_i u(n) + φ)   k <= i < N
//! x_i(n) = sin(α x_{N+i-k}(n-2) + β m_i u(n) + φ)   0 <= i < k
//! ```

mod dynamics;
mod mask;

pub use dynamics::{run_discrete, step_desynchronized, step_synchronized, InitialState};
pub use mask::{drive_term, generate_mask, InputMask, MaskDistribution, MaskSpec};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Upper end of the experimentally tunable feedback gain range.
pub const MAX_FEEDBACK_GAIN: f64 = 4.2;

/// Operating point of the reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    /// Number of virtual nodes `N`.
    pub n_nodes: usize,
    /// Desynchronization `k` in node slots; `0` is the synchronized regime.
    #[serde(default = "default_desync")]
    pub desync_k: usize,
    /// Feedback gain `α`.
    pub feedback_gain: f64,
    /// Input gain `β`.
    pub input_gain: f64,
    /// Bias `φ` in radians.
    #[serde(default)]
    pub bias: f64,
}

fn default_desync() -> usize {
    1
}

impl ReservoirParams {
    /// Validated parameters with the default feedback-gain bound.
    pub fn new(
        n_nodes: usize,
        desync_k: usize,
        feedback_gain: f64,
        input_gain: f64,
        bias: f64,
    ) -> Result<Self> {
        let p = Self {
            n_nodes,
            desync_k,
            feedback_gain,
            input_gain,
            bias,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_bound(MAX_FEEDBACK_GAIN)
    }

    pub fn validate_with_bound(&self, max_feedback_gain: f64) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::param("n_nodes must be at least 1"));
        }
        if self.desync_k >= self.n_nodes {
            return Err(Error::param(format!(
                "desync_k = {} must be below n_nodes = {}",
                self.desync_k, self.n_nodes
            )));
        }
        if !(0.0..=max_feedback_gain).contains(&self.feedback_gain) {
            return Err(Error::param(format!(
                "feedback_gain = {} outside [0, {max_feedback_gain}]",
                self.feedback_gain
            )));
        }
        if !self.input_gain.is_finite() || !self.bias.is_finite() {
            return Err(Error::param("input_gain and bias must be finite"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_invariants() {
        assert!(ReservoirParams::new(50, 1, 0.9, 0.5, 0.0).is_ok());
        assert!(ReservoirParams::new(0, 0, 0.9, 0.5, 0.0).is_err());
        assert!(ReservoirParams::new(5, 5, 0.9, 0.5, 0.0).is_err());
        assert!(ReservoirParams::new(5, 1, 4.3, 0.5, 0.0).is_err());
        assert!(ReservoirParams::new(5, 1, -0.1, 0.5, 0.0).is_err());
        assert!(ReservoirParams::new(5, 1, 4.2, 0.5, 0.0).is_ok());
    }

    #[test]
    fn serde_defaults() {
        let p: ReservoirParams =
            toml::from_str("n_nodes = 10\nfeedback_gain = 0.5\ninput_gain = 0.1").unwrap();
        assert_eq!(p.desync_k, 1);
        assert_eq!(p.bias, 0.0);
    }
}
