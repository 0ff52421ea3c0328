//! Time-indexed containers shared by the reservoir backends, tasks and readout.

use std::ops::Range;

use crate::{Error, Result};

/// A `K`-channel input sequence `u_j(n)` of length `L`, stored step-major so
/// that the input vector of one time step is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSequence {
    n_channels: usize,
    data: Vec<f64>,
}

impl InputSequence {
    /// Builds a sequence from step-major data (`data[n * K + j] = u_j(n)`).
    pub fn new(n_channels: usize, data: Vec<f64>) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::param("input sequence needs at least one channel"));
        }
        if !data.len().is_multiple_of(n_channels) {
            return Err(Error::param(format!(
                "{} values do not form whole steps of {n_channels} channels",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("input sequence contains non-finite values"));
        }
        Ok(Self { n_channels, data })
    }

    /// Single-channel sequence `u(n)`.
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    pub fn from_steps(steps: &[Vec<f64>]) -> Result<Self> {
        let k = steps.first().map_or(1, Vec::len);
        if steps.iter().any(|s| s.len() != k) {
            return Err(Error::param("input steps have inconsistent channel counts"));
        }
        Self::new(k, steps.concat())
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n_channels
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Input vector presented at step `n`.
    pub fn step(&self, n: usize) -> &[f64] {
        &self.data[n * self.n_channels..(n + 1) * self.n_channels]
    }

    pub fn steps(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n_channels)
    }

    /// Values of channel `j` over time.
    pub fn channel(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.n_channels).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn slice(&self, range: Range<usize>) -> InputSequence {
        InputSequence {
            n_channels: self.n_channels,
            data: self.data[range.start * self.n_channels..range.end * self.n_channels].to_vec(),
        }
    }
}

/// Reservoir states `x_i(n)`: `N` nodes by `L` steps, every entry in `[-1, 1]`.
///
/// Columns (one per time step) are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    n_nodes: usize,
    data: Vec<f64>,
}

impl StateMatrix {
    /// Builds a matrix from column-major data (`data[n * N + i] = x_i(n)`).
    pub fn new(n_nodes: usize, data: Vec<f64>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::param("state matrix needs at least one node"));
        }
        if !data.len().is_multiple_of(n_nodes) {
            return Err(Error::param(format!(
                "{} values do not form whole columns of {n_nodes} nodes",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::param(format!("state value {v} outside [-1, 1]")));
        }
        Ok(Self { n_nodes, data })
    }

    /// Builds a matrix from node rows (`rows[i][n] = x_i(n)`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_nodes = rows.len();
        let n_steps = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_steps) {
            return Err(Error::param("state rows have different lengths"));
        }
        let mut data = Vec::with_capacity(n_nodes * n_steps);
        for n in 0..n_steps {
            data.extend(rows.iter().map(|r| r[n]));
        }
        Self::new(n_nodes, data)
    }

    /// Empty matrix with room for `n_steps` columns.
    pub(crate) fn with_capacity(n_nodes: usize, n_steps: usize) -> Self {
        Self {
            n_nodes,
            data: Vec::with_capacity(n_nodes * n_steps),
        }
    }

    /// Appends a column produced by a bounded nonlinearity.
    pub(crate) fn push_column(&mut self, column: &[f64]) {
        debug_assert_eq!(column.len(), self.n_nodes);
        self.data.extend_from_slice(column);
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_steps(&self) -> usize {
        self.data.len() / self.n_nodes
    }

    pub fn get(&self, node: usize, step: usize) -> f64 {
        self.data[step * self.n_nodes + node]
    }

    pub fn column(&self, step: usize) -> &[f64] {
        &self.data[step * self.n_nodes..(step + 1) * self.n_nodes]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n_nodes)
    }

    /// Time series of a single node.
    pub fn row(&self, node: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(node).step_by(self.n_nodes).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copy of the columns in `range`.
    pub fn slice(&self, range: Range<usize>) -> StateMatrix {
        StateMatrix {
            n_nodes: self.n_nodes,
            data: self.data[range.start * self.n_nodes..range.end * self.n_nodes].to_vec(),
        }
    }

    /// Concatenates matrices with equal node counts along time.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a StateMatrix>) -> Result<StateMatrix> {
        let mut parts = parts.into_iter().peekable();
        let n_nodes = parts
            .peek()
            .map(|m| m.n_nodes)
            .ok_or_else(|| Error::param("nothing to concatenate"))?;
        let mut data = Vec::new();
        for m in parts {
            if m.n_nodes != n_nodes {
                return Err(Error::param("cannot concatenate states of different widths"));
            }
            data.extend_from_slice(&m.data);
        }
        Ok(StateMatrix { n_nodes, data })
    }

    /// Largest absolute entry-wise difference to another matrix of equal shape.
    pub fn max_abs_diff(&self, other: &StateMatrix) -> Result<f64> {
        if self.n_nodes != other.n_nodes || self.data.len() != other.data.len() {
            return Err(Error::param("state matrices differ in shape"));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
