use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

/// Distribution the mask entries are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum MaskDistribution {
    /// Uniform on `[lo, hi)`.
    Uniform { lo: f64, hi: f64 },
    /// `±value` with equal probability.
    Binary { value: f64 },
}

impl MaskDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MaskDistribution::Uniform { lo, hi } if !(lo < hi) || !lo.is_finite() || !hi.is_finite() => {
                Err(Error::param(format!("uniform mask needs lo < hi, got [{lo}, {hi})")))
            }
            MaskDistribution::Binary { value } if !(value > 0.0) || !value.is_finite() => {
                Err(Error::param(format!("binary mask needs value > 0, got {value}")))
            }
            _ => Ok(()),
        }
    }
}

/// Everything needed to (re)generate a mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskSpec {
    pub distribution: MaskDistribution,
    pub n_nodes: usize,
    pub n_inputs: usize,
    pub seed: u64,
}

/// Input mask `b_ij` (`N` nodes by `K` input channels); `K = 1` is the
/// scalar mask `m_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputMask {
    n_nodes: usize,
    n_inputs: usize,
    values: Vec<f64>,
}

impl InputMask {
    /// Mask from explicit node-major values (`values[i * K + j] = b_ij`).
    pub fn from_values(n_nodes: usize, n_inputs: usize, values: Vec<f64>) -> Result<Self> {
        if n_nodes == 0 || n_inputs == 0 {
            return Err(Error::param("mask dimensions must be positive"));
        }
        if values.len() != n_nodes * n_inputs {
            return Err(Error::param(format!(
                "expected {} mask values, got {}",
                n_nodes * n_inputs,
                values.len()
            )));
        }
        Ok(Self {
            n_nodes,
            n_inputs,
            values,
        })
    }

    /// Scalar-input mask `m_i`.
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::from_values(values.len(), 1, values)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn get(&self, node: usize, input: usize) -> f64 {
        self.values[node * self.n_inputs + input]
    }

    /// Mask row of node `i`.
    pub fn row(&self, node: usize) -> &[f64] {
        &self.values[node * self.n_inputs..(node + 1) * self.n_inputs]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ_j b_ij u_j` for every node, without the input gain.
    pub(crate) fn project_into(&self, u: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.values.chunks_exact(self.n_inputs)) {
            *o = row.iter().zip(u).map(|(b, u)| b * u).sum();
        }
    }

    pub(crate) fn check_input(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n_inputs {
            return Err(Error::param(format!(
                "input has {} channels, mask expects {}",
                u.len(),
                self.n_inputs
            )));
        }
        Ok(())
    }
}

/// Draws a mask, filling node-major from a stream seeded with `spec.seed`.
pub fn generate_mask(spec: &MaskSpec) -> Result<InputMask> {
    spec.distribution.validate()?;
    if spec.n_nodes == 0 || spec.n_inputs == 0 {
        return Err(Error::param("mask dimensions must be positive"));
    }
    let mut rng = seed::rng_from_seed(spec.seed);
    let values = (0..spec.n_nodes * spec.n_inputs)
        .map(|_| match spec.distribution {
            MaskDistribution::Uniform { lo, hi } => seed::uniform(&mut rng, lo, hi),
            MaskDistribution::Binary { value } => {
                if seed::coin(&mut rng) {
                    value
                } else {
                    -value
                }
            }
        })
        .collect();
    InputMask::from_values(spec.n_nodes, spec.n_inputs, values)
}

/// Input drive `β Σ_j b_ij u_j` of every node.
pub fn drive_term(mask: &InputMask, u: &[f64], input_gain: f64) -> Result<Vec<f64>> {
    mask.check_input(u)?;
    let mut out = vec![0.0; mask.n_nodes];
    mask.project_into(u, &mut out);
    out.iter_mut().for_each(|v| *v *= input_gain);
    Ok(out)
}
