use super::{InputMask, ReservoirParams};
use crate::series::{InputSequence, StateMatrix};
use crate::{Error, Result};

/// Predecessor states `x(n-1)` and `x(n-2)` the recursion starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub prev: Vec<f64>,
    pub prev2: Vec<f64>,
}

impl InitialState {
    pub fn zeros(n_nodes: usize) -> Self {
        Self {
            prev: vec![0.0; n_nodes],
            prev2: vec![0.0; n_nodes],
        }
    }
}

fn check_dims(params: &ReservoirParams, mask: &InputMask, states: &[&[f64]], u: &[f64]) -> Result<()> {
    if mask.n_nodes() != params.n_nodes {
        return Err(Error::param(format!(
            "mask has {} nodes, reservoir has {}",
            mask.n_nodes(),
            params.n_nodes
        )));
    }
    if let Some(s) = states.iter().find(|s| s.len() != params.n_nodes) {
        return Err(Error::param(format!(
            "state vector has length {}, expected {}",
            s.len(),
            params.n_nodes
        )));
    }
    mask.check_input(u)
}

/// One step of the synchronized recursion; `desync_k` is ignored.
pub fn step_synchronized(
    params: &ReservoirParams,
    mask: &InputMask,
    prev: &[f64],
    u: &[f64],
) -> Result<Vec<f64>> {
    check_dims(params, mask, &[prev], u)?;
    let mut out = vec![0.0; params.n_nodes];
    mask.project_into(u, &mut out);
    advance(params, 0, prev, prev, &mut out);
    Ok(out)
}

/// One step of the desynchronized recursion with wrap-around.
pub fn step_desynchronized(
    params: &ReservoirParams,
    mask: &InputMask,
    state_nm1: &[f64],
    state_nm2: &[f64],
    u: &[f64],
) -> Result<Vec<f64>> {
    if params.desync_k == 0 {
        return Err(Error::param(
            "desync_k = 0 is the synchronized regime; use step_synchronized",
        ));
    }
    check_dims(params, mask, &[state_nm1, state_nm2], u)?;
    let mut out = vec![0.0; params.n_nodes];
    mask.project_into(u, &mut out);
    advance(params, params.desync_k, state_nm1, state_nm2, &mut out);
    Ok(out)
}

/// Turns the projected input held in `out` into the next state.
///
/// With `k = 0` this is the synchronized update.
fn advance(params: &ReservoirParams, k: usize, nm1: &[f64], nm2: &[f64], out: &mut [f64]) {
    let n = params.n_nodes;
    let (alpha, beta, phi) = (params.feedback_gain, params.input_gain, params.bias);
    for (i, x) in out.iter_mut().enumerate() {
        let feedback = if i >= k { nm1[i - k] } else { nm2[n + i - k] };
        *x = (alpha * feedback + beta * *x + phi).sin();
    }
}

/// Iterates the recursion over a whole input sequence.
///
/// Column `n` of the result is the state after presenting `inputs.step(n)`.
/// `init` defaults to zero predecessors.
pub fn run_discrete(
    params: &ReservoirParams,
    mask: &InputMask,
    inputs: &InputSequence,
    init: Option<&InitialState>,
) -> Result<StateMatrix> {
    params.validate()?;
    let n = params.n_nodes;
    let zeros;
    let init = match init {
        Some(s) => s,
        None => {
            zeros = InitialState::zeros(n);
            &zeros
        }
    };
    if inputs.is_empty() {
        return Err(Error::param("input sequence is empty"));
    }
    check_dims(params, mask, &[&init.prev, &init.prev2], inputs.step(0))?;

    let k = params.desync_k;
    let mut states = StateMatrix::with_capacity(n, inputs.len());
    let mut nm2 = init.prev2.clone();
    let mut nm1 = init.prev.clone();
    let mut next = vec![0.0; n];
    for u in inputs.steps() {
        mask.project_into(u, &mut next);
        advance(params, k, &nm1, &nm2, &mut next);
        states.push_column(&next);
        std::mem::swap(&mut nm2, &mut nm1);
        std::mem::swap(&mut nm1, &mut next);
    }
    Ok(states)
}
